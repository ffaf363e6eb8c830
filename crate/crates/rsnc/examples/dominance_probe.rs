use rsnc::graph::CodingGraph;
use rsnc::harness::{generate_scenario, GeneratorConfig};
use rsnc::model::schedule_doc;
use rsnc::scheduler::{run_rsnc, run_rsnc_exact, ExactLimits};

fn main() {
    let seed = 104497u64;
    let cfg = GeneratorConfig {
        n: 3 + (seed % 3) as usize,
        m: 2 + (seed % 4) as usize,
        packet_size: [10.0, 100.0][(seed % 2) as usize],
        rmin: 2.0, rmax: 40.0, tmin: 1.0, tmax: 30.0,
        alpha_min: 0.5, alpha_max: 5.0, has_density: [0.2, 0.5, 0.8][(seed % 3) as usize],
        samples: 1, seed, two_class: None, sweep: vec![],
    };
    let s = generate_scenario(&cfg, 0);
    println!("{}", s.to_json());
    let g = CodingGraph::build(&s);
    println!("vertices: {:?}", g.vertices().iter().map(|v| (v.dest, v.packet)).collect::<Vec<_>>());
    println!("edges:\n{}", g.edge_list_dump());
    let heur = run_rsnc(&s);
    let exact = run_rsnc_exact(&s, ExactLimits::default()).unwrap();
    println!("rsnc {} vs exact {}", heur.total_benefit, exact.total_benefit);
    println!("rsnc schedule: {}", serde_json::to_string(&schedule_doc(&s, &heur)).unwrap());
}
