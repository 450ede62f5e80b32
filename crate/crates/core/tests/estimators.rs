use msalab::disorder::DisorderSpec;
use msalab::estimators::{molchanov_averaged, wegner_mc, wegner_mc_multi};
use msalab::geometry::{Segment, Site2, SubSquare};
use msalab::operators::Site;
use msalab::stats::Status;
use msalab::system::{System, Volume};

fn sys(seed: u64) -> System {
    System::free_of_interaction(DisorderSpec::cauchy(1.0, 5.0, seed))
}

/// Both radius conventions for a rectangle `(2L1+1) x (2L2+1)`:
/// `e^{-(L1 L2)^{β/2}}` and `e^{-(min(L1, L2))^{β/2}}`.
#[test]
fn wegner_bound_holds_for_both_radius_readings() {
    let (l1, l2, beta) = (4.0f64, 2.0f64, 0.5);
    let rect = SubSquare::new(Segment::centered(40, 4).unwrap(), Segment::centered(6, 2).unwrap(), false).unwrap();
    let readings = [(-(l1 * l2).powf(beta / 2.0)).exp(), (-l1.min(l2).powf(beta / 2.0)).exp()];
    assert!(readings[0] < readings[1]);
    let ests = wegner_mc_multi(&sys(8), &Volume::Square { square: rect }, 0.0, &readings, 4000).unwrap();
    for e in &ests {
        let bound = 2.0 / (std::f64::consts::PI * 6.0) * 45.0 * e.r;
        assert!((e.estimate.bound_value().unwrap() - bound).abs() < 1e-12);
        assert!(e.estimate.ci_high <= bound, "r {}: {:?}", e.r, e.estimate);
        assert_eq!(e.estimate.status, Status::Ok);
    }
}

#[test]
fn estimates_do_not_depend_on_the_thread_count() {
    let vol = Volume::from(SubSquare::centered(Site2::new(30, 5), 2).unwrap());
    let s = sys(12);
    let many = wegner_mc(&s, &vol, 0.1, 0.05, 3000).unwrap();
    let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let one = pool.install(|| wegner_mc(&s, &vol, 0.1, 0.05, 3000).unwrap());
    assert_eq!(many, one);

    let seg = Volume::from(Segment::new(0, 6).unwrap());
    let a = molchanov_averaged(&s, &seg, &Site::Line(3), 0.3, 5000).unwrap();
    let b = pool.install(|| molchanov_averaged(&s, &seg, &Site::Line(3), 0.3, 5000).unwrap());
    assert_eq!(a, b);
}

#[test]
fn replicate_prefixes_are_stable() {
    // Growing n only appends replicates: the first 500 draws are shared.
    let vol = Volume::from(SubSquare::centered(Site2::new(30, 5), 2).unwrap());
    let s = sys(21);
    let small = wegner_mc(&s, &vol, 0.0, 0.2, 500).unwrap().estimate.successes;
    let big = wegner_mc(&s, &vol, 0.0, 0.2, 1000).unwrap().estimate.successes;
    assert!(big >= small);
}
