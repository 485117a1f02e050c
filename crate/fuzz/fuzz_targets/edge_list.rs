//! The edge-list parser must never panic, and every graph it accepts must
//! round-trip through its own text rendering.
#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(graph) = asd::graph::Graph::parse_edge_list(text) {
        let rendered = graph.to_edge_list();
        let again = asd::graph::Graph::parse_edge_list(&rendered).expect("round trip parses");
        assert_eq!(again.node_count(), graph.node_count());
        assert_eq!(again.edge_count(), graph.edge_count());
    }
});
