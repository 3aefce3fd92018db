use hybrid_core::analytic::{fidelity1, heralded_state_simple, p0_squeezed, p1, p2, p_ideal, OperatingPoint};
use hybrid_core::detectors::simple_herald;
use hybrid_core::fock::TruncationPolicy;
use hybrid_core::labels::{B, HERALD_MODES};
use hybrid_core::scheme::{
    branch_state, component_operator, engine_overlap, heralded_component_probabilities, overlap_defect, run, CvInput,
    Engine, HeraldKind, NetworkConfig,
};
use hybrid_core::sources::{DvComponent, DvSource, EpsilonState};

fn tight() -> TruncationPolicy {
    TruncationPolicy { eps: 1e-14, ..TruncationPolicy::default() }
}

fn point(alpha: f64, ra: f64, eta: f64) -> NetworkConfig {
    NetworkConfig::from_r_alpha(alpha, ra, eta).unwrap()
}

fn only(c: DvComponent) -> DvSource {
    let (p0, p1, p_eps) = match c {
        DvComponent::Vacuum => (1.0, 0.0, 0.0),
        DvComponent::Pair => (0.0, 1.0, 0.0),
        DvComponent::Multipair => (0.0, 0.0, 1.0),
    };
    DvSource::TruncatedMultipair { p0, p1, p_eps, eps: EpsilonState::spdc() }
}

#[test]
fn pair_expansion_matches_detector_state() {
    let cfg = point(2.0, 0.106, 0.95);
    let s = branch_state(&cfg, DvComponent::Pair).unwrap();
    let terms = s.expand().unwrap();
    assert_eq!(terms.len(), 16);
    let amp = cfg.r_alpha() / 2f64.sqrt();
    let b = s.position(B).unwrap();
    let pos: Vec<usize> = HERALD_MODES.iter().map(|&m| s.position(m).unwrap()).collect();
    let c0 = terms[0].coefficient;
    for t in &terms {
        assert!((t.coefficient - c0).norm() < 1e-12);
        assert!(c0.re > 0.0 && c0.im.abs() < 1e-15);
        let d: Vec<f64> = pos.iter().map(|&p| t.displacement[p].re / amp).collect();
        // Detector order: C, D, E, F early then late.
        let expect = if t.displacement[b].re > 0.0 {
            [0.0, 0.0, 0.0, 0.0, 1.0, -1.0, -1.0, 1.0]
        } else {
            [-1.0, 1.0, -1.0, 1.0, 0.0, 0.0, 0.0, 0.0]
        };
        for (x, e) in d.iter().zip(expect) {
            assert!((x - e).abs() < 1e-12, "{d:?}");
        }
        assert!((t.displacement[b].norm() - cfg.alpha_f()).abs() < 1e-12);
    }
}

#[test]
fn branch_counts() {
    let cfg = point(2.0, 0.106, 0.95);
    assert_eq!(branch_state(&cfg, DvComponent::Vacuum).unwrap().term_count(), 2);
    assert_eq!(branch_state(&cfg, DvComponent::Multipair).unwrap().term_count(), 72);
    assert_eq!(cfg.resolved_engine().unwrap(), Engine::Branch);
    let sq = cfg.with_cv(CvInput::SqueezedVacuum { zeta: -0.061 }).unwrap();
    assert_eq!(sq.resolved_engine().unwrap(), Engine::Dense);
}

#[test]
fn ideal_herald_gives_target() {
    for engine in [Engine::Dense, Engine::Branch] {
        for (alpha, ra) in [(0.5, 0.05), (1.0, 0.7), (2.0, 1.5)] {
            let cfg = point(alpha, ra, 1.0).with_herald(HeraldKind::Ideal).with_engine(engine).with_policy(tight());
            let out = run(&cfg).unwrap();
            let f = out.fidelity().unwrap();
            assert!((1.0 - f).abs() < 1e-10, "{engine:?} α={alpha} rα={ra}: {f}");
        }
    }
}

#[test]
fn ideal_probability_matches_closed_form() {
    for ra in [0.1, 0.5, 1.0] {
        let cfg = point(2.0, ra, 1.0).with_herald(HeraldKind::Ideal).with_engine(Engine::Dense).with_policy(tight());
        let p = run(&cfg).unwrap().outcome.probability;
        let pt = OperatingPoint::from_r_alpha(2.0, ra, 1.0).unwrap();
        assert!((p - p_ideal(&pt)).abs() < 1e-10, "rα={ra}: {p} vs {}", p_ideal(&pt));
    }
}

#[test]
fn simple_herald_state_elementwise() {
    // Elementwise agreement at 1e-9 needs the amplitude tail near 1e-18.
    let policy = TruncationPolicy { eps: 1e-18, ..TruncationPolicy::default() };
    let cfg = point(2.0, 0.106, 0.95).with_engine(Engine::Dense).with_policy(policy);
    let out = run(&cfg).unwrap();
    let pt = OperatingPoint::from_r_alpha(2.0, 0.106, 0.95).unwrap();
    let rho = &out.outcome.state;
    let oracle = heralded_state_simple(&pt, rho.cutoff(B).unwrap()).permuted(rho.modes()).unwrap();
    for (a, b) in rho.data().iter().zip(oracle.data()) {
        assert!((a - b).norm() < 1e-9, "{a} {b}");
    }
    assert!((out.outcome.probability - p1(&pt)).abs() < 1e-9);
}

#[test]
fn cat_with_vacuum_pair_never_heralds() {
    let strategy = simple_herald(0.95).unwrap();
    for ra in [0.106, 0.5] {
        let cfg = point(2.0, ra, 0.95).with_engine(Engine::Branch);
        let p = component_operator(&cfg, DvComponent::Vacuum, &strategy).unwrap().trace().re;
        assert!(p.abs() < 1e-12, "branch {p}");
        let cfg = cfg.with_engine(Engine::Dense).with_policy(tight());
        let p = component_operator(&cfg, DvComponent::Vacuum, &strategy).unwrap().trace().re;
        assert!(p.abs() < 1e-12, "dense {p}");
    }
}

#[test]
fn double_pair_probability() {
    for ra in [0.05, 0.2, 0.5] {
        let cfg = point(2.0, ra, 0.9).with_dv(only(DvComponent::Multipair)).unwrap().with_engine(Engine::Dense);
        let got = heralded_component_probabilities(&cfg).unwrap().p_eps;
        let pt = OperatingPoint::from_r_alpha(2.0, ra, 0.9).unwrap();
        assert!((got - p2(&pt)).abs() < 1e-6, "rα={ra}: {got} vs {}", p2(&pt));
    }
}

#[test]
fn squeezed_vacuum_herald_probability() {
    let ra = 0.075 * 2f64.sqrt();
    let cfg = point(0.25, ra, 0.95).with_cv(CvInput::SqueezedVacuum { zeta: -0.061 }).unwrap();
    let dense = heralded_component_probabilities(&cfg).unwrap().p0;
    let series = p0_squeezed(-0.061, cfg.r, 0.25, 0.95, 1e-12).unwrap().value;
    assert!((dense / series - 1.0).abs() < 1e-3, "{dense} vs {series}");
}

#[test]
fn engines_overlap() {
    for c in [DvComponent::Vacuum, DvComponent::Pair, DvComponent::Multipair] {
        for ra in [0.106, 0.8] {
            let cfg = point(2.0, ra, 0.95);
            let ov = engine_overlap(&cfg, c).unwrap();
            assert!(overlap_defect(ov) < 1e-9, "{c:?} rα={ra}: {ov}");
        }
    }
}

#[test]
fn mixture_combines_component_probabilities() {
    let dv = DvSource::Spdc { lambda2: 0.01 };
    let cfg = point(2.0, 0.3, 0.9).with_dv(dv).unwrap().with_engine(Engine::Dense);
    let cp = heralded_component_probabilities(&cfg).unwrap();
    let total = run(&cfg).unwrap().outcome.probability;
    assert!((total - cp.combined).abs() < 1e-12 * total.max(1e-3), "{total} {cp:?}");
}

#[test]
fn simple_probability_grows_with_efficiency() {
    let mut last = 0.0;
    for k in 1..=10 {
        let cfg = point(2.0, 0.3, k as f64 / 10.0);
        let p = run(&cfg).unwrap().outcome.probability;
        assert!(p >= last);
        last = p;
    }
}

#[test]
fn closed_forms_on_grid() {
    for alpha in [1.0, 1.5, 2.0] {
        for ra in [0.05, 0.3, 0.8] {
            for eta in [0.5, 0.8, 1.0] {
                let pt = OperatingPoint::from_r_alpha(alpha, ra, eta).unwrap();
                let cfg = point(alpha, ra, eta).with_engine(Engine::Branch).with_policy(tight());
                let out = run(&cfg).unwrap();
                let rel = |a: f64, b: f64| (a / b - 1.0).abs();
                assert!(rel(out.outcome.probability, p1(&pt)) < 1e-8, "P α={alpha} rα={ra} η={eta}");
                assert!(rel(out.fidelity().unwrap(), fidelity1(&pt)) < 1e-8, "F α={alpha} rα={ra} η={eta}");
                let ideal = run(&cfg.with_herald(HeraldKind::Ideal)).unwrap().outcome.probability;
                assert!(rel(ideal, p_ideal(&pt)) < 1e-8);
            }
        }
    }
}
