use germlens::directions::{direction_set_estimate, DirectionParams};
use germlens::fixtures::catalog;
use germlens::ssp::{ssp_pair, SspConfig};
use germlens::Verdict;

#[test]
fn strong_and_weak_probes_agree_on_the_catalog() {
    let mut disagreements = Vec::new();
    for f in catalog() {
        for (role, g) in &f.germs {
            let p = DirectionParams { schedule: f.schedule, ..DirectionParams::default() };
            let d = direction_set_estimate(g, &p).unwrap();
            let cfg = SspConfig { schedule: f.schedule, ..SspConfig::default() };
            let (s, w) = ssp_pair(g, &d, &cfg).unwrap();
            println!("{}:{role} strong {:?} weak {:?}", f.name, s.verdict, w.verdict);
            if s.verdict == Verdict::Pass {
                assert_eq!(w.verdict, Verdict::Pass, "strong pass implies weak pass");
            }
            if s.verdict != w.verdict && !f.toy {
                disagreements.push(format!("{}:{role}", f.name));
            }
        }
    }
    assert!(disagreements.is_empty(), "{disagreements:?}");
}
