//! Bundled desk-scale instances used by the test suites and as CLI examples.

use crate::ground::GroundSet;
use crate::ingest::{from_graph, from_matroid_rank, GraphInstance, MatroidInstance};
use crate::system::ConnectivitySystem;

/// U_{2,4} on elements a, b, c, d.
pub fn u24() -> ConnectivitySystem {
    let ground = GroundSet::new(vec!["a", "b", "c", "d"]).unwrap();
    from_matroid_rank(&MatroidInstance::uniform(2, ground)).unwrap()
}

/// The free matroid U_{n,n}; its connectivity function is constantly 1.
pub fn free(n: usize) -> ConnectivitySystem {
    let labels: Vec<String> = (1..=n).map(|i| format!("e{i}")).collect();
    let ground = GroundSet::new(labels).unwrap();
    from_matroid_rank(&MatroidInstance::uniform(n as i32, ground)).unwrap()
}

/// Path on five vertices a..e with edges ab, bc, cd, de.
pub fn path_graph() -> GraphInstance {
    GraphInstance::new(
        vec!["a", "b", "c", "d", "e"],
        vec![("ab", "a", "b"), ("bc", "b", "c"), ("cd", "c", "d"), ("de", "d", "e")],
    )
    .unwrap()
}

pub fn path_system() -> ConnectivitySystem {
    from_graph(&path_graph()).unwrap()
}

/// Cycle on five vertices with edges e1..e5.
pub fn cycle_graph() -> GraphInstance {
    let vertices: Vec<String> = (1..=5).map(|i| format!("v{i}")).collect();
    let edges: Vec<(String, String, String)> = (1..=5)
        .map(|i| (format!("e{i}"), format!("v{i}"), format!("v{}", i % 5 + 1)))
        .collect();
    GraphInstance::new(vertices, edges).unwrap()
}

pub fn cycle_system() -> ConnectivitySystem {
    from_graph(&cycle_graph()).unwrap()
}

fn k4_edges(vertices: [u32; 4]) -> Vec<(String, String, String)> {
    let mut edges = Vec::new();
    for i in 0..4 {
        for j in (i + 1)..4 {
            edges.push((
                format!("{}{}", vertices[i], vertices[j]),
                format!("{}", vertices[i]),
                format!("{}", vertices[j]),
            ));
        }
    }
    edges
}

/// Complete graph on vertices 1..4, six edges.
pub fn k4_graph() -> GraphInstance {
    let vertices: Vec<String> = (1..=4).map(|i| i.to_string()).collect();
    GraphInstance::new(vertices, k4_edges([1, 2, 3, 4])).unwrap()
}

pub fn k4_system() -> ConnectivitySystem {
    from_graph(&k4_graph()).unwrap()
}

/// Two K4s on vertex sets {1..4} and {5..8} joined by the bridge edge 45;
/// thirteen edges in total.
pub fn bridged_k4s_graph() -> GraphInstance {
    let vertices: Vec<String> = (1..=8).map(|i| i.to_string()).collect();
    let mut edges = k4_edges([1, 2, 3, 4]);
    edges.push(("45".to_string(), "4".to_string(), "5".to_string()));
    edges.extend(k4_edges([5, 6, 7, 8]));
    GraphInstance::new(vertices, edges).unwrap()
}

pub fn bridged_k4s() -> ConnectivitySystem {
    from_graph(&bridged_k4s_graph()).unwrap()
}

/// Three K4s chained by two bridges: exactly twenty edges, the ground-set cap.
pub fn three_k4_chain_graph() -> GraphInstance {
    let vertices: Vec<String> = (1..=12).map(|i| i.to_string()).collect();
    let mut edges = k4_edges([1, 2, 3, 4]);
    edges.push(("45".to_string(), "4".to_string(), "5".to_string()));
    edges.extend(k4_edges([5, 6, 7, 8]));
    edges.push(("89".to_string(), "8".to_string(), "9".to_string()));
    edges.extend(k4_edges([9, 10, 11, 12]));
    GraphInstance::new(vertices, edges).unwrap()
}

pub fn three_k4_chain() -> ConnectivitySystem {
    from_graph(&three_k4_chain_graph()).unwrap()
}

/// Three triangles chained by two bridges: the eleven-edge variant of the
/// chain, small enough for the full pipeline.
pub fn three_triangle_chain_graph() -> GraphInstance {
    let vertices: Vec<String> = (1..=9).map(|i| i.to_string()).collect();
    let tri = |a: u32, b: u32, c: u32| {
        vec![
            (format!("{a}{b}"), format!("{a}"), format!("{b}")),
            (format!("{b}{c}"), format!("{b}"), format!("{c}")),
            (format!("{a}{c}"), format!("{a}"), format!("{c}")),
        ]
    };
    let mut edges = tri(1, 2, 3);
    edges.push(("34".to_string(), "3".to_string(), "4".to_string()));
    edges.extend(tri(4, 5, 6));
    edges.push(("67".to_string(), "6".to_string(), "7".to_string()));
    edges.extend(tri(7, 8, 9));
    GraphInstance::new(vertices, edges).unwrap()
}

pub fn three_triangle_chain() -> ConnectivitySystem {
    from_graph(&three_triangle_chain_graph()).unwrap()
}

/// Every bundled fixture in a fixed order.
pub fn all_fixtures() -> Vec<(&'static str, ConnectivitySystem)> {
    let mut out: Vec<(&'static str, ConnectivitySystem)> = vec![("u24", u24())];
    out.push(("free1", free(1)));
    out.push(("free2", free(2)));
    out.push(("free3", free(3)));
    out.push(("free4", free(4)));
    out.push(("free5", free(5)));
    out.push(("free6", free(6)));
    out.push(("path", path_system()));
    out.push(("cycle5", cycle_system()));
    out.push(("k4", k4_system()));
    out.push(("bridged_k4s", bridged_k4s()));
    out.push(("three_triangle_chain", three_triangle_chain()));
    out.push(("three_k4_chain", three_k4_chain()));
    out
}

/// Fixtures small enough for the end-to-end tree pipeline.
pub fn pipeline_fixtures() -> Vec<(&'static str, ConnectivitySystem)> {
    all_fixtures().into_iter().filter(|(_, s)| s.size() <= 13).collect()
}
