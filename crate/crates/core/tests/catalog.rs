use std::collections::BTreeSet;

use proptest::prelude::*;

use superint::catalog::{self, LimitTarget, Regime, Tier};
use superint::detsolve::{residual_determining, residual_linear_compat};
use superint::{Error, ParamSet};

fn defaults(id: &str) -> catalog::Instance {
    catalog::instantiate(id, &ParamSet::new()).unwrap_or_else(|e| panic!("{id}: {e}"))
}

#[test]
fn every_entry_passes_its_determining_equations() {
    for e in catalog::entries() {
        let inst = defaults(e.id);
        assert!(!inst.integrals.is_empty(), "{}", e.id);
        assert_eq!(inst.integrals.len(), e.integral_labels.len(), "{}", e.id);
        for (k, x) in inst.integrals.iter().enumerate() {
            let r = residual_determining(&inst.potential, x, &inst.default_grid()).unwrap().judged(inst.tolerance());
            assert!(r.passed(), "{} X{}: {:.3e}", e.id, k + 1, r.max_abs());
        }
    }
}

#[test]
fn linear_compatibility_follows_from_the_determining_equations() {
    for e in catalog::entries() {
        let inst = defaults(e.id);
        for (k, x) in inst.integrals.iter().enumerate() {
            let r = residual_linear_compat(&inst.potential, &x.coeffs, &inst.default_grid()).unwrap();
            assert!(r.max_abs() <= inst.tolerance(), "{} X{}: {:.3e}", e.id, k + 1, r.max_abs());
        }
    }
}

#[test]
fn labels_name_the_leading_terms() {
    for e in catalog::entries() {
        let inst = defaults(e.id);
        for (label, x) in e.integral_labels.iter().zip(&inst.integrals) {
            let named: BTreeSet<_> = catalog::parse_leading_label(label).unwrap().into_iter().collect();
            let present: BTreeSet<_> = x.coeffs.nonzero_pattern().into_iter().collect();
            assert_eq!(named, present, "{} {label}", e.id);
        }
    }
}

#[test]
fn table_rows_agree_with_their_entries() {
    let rows = catalog::table1();
    assert!(!rows.is_empty());
    let mut seen = BTreeSet::new();
    for (label, id, terms) in rows {
        assert!(seen.insert(label), "duplicate row {label}");
        let e = catalog::find(id).unwrap();
        assert_eq!(e.regime, Regime::Quantum);
        assert_eq!(e.table1_label, Some(label));
        assert_eq!(terms, e.integral_labels.join("; "));
    }
}

#[test]
fn printed_variants_are_rejected() {
    let mut checked = 0;
    for e in catalog::entries() {
        let inst = defaults(e.id);
        for (k, x) in catalog::printed_variants(e.id, &ParamSet::new()).unwrap() {
            let r = residual_determining(&inst.potential, &x, &inst.default_grid()).unwrap().judged(inst.tolerance());
            assert!(!r.passed(), "{} printed X{} unexpectedly passes", e.id, k + 1);
            checked += 1;
        }
    }
    assert!(checked >= 5);
}

#[test]
fn pure_hbar_squared_entries_scale() {
    let cases: &[(&str, &[(&str, f64)])] = &[
        ("Q.3", &[("a", 0.0)]),
        ("Q.5", &[]),
        ("Q.6", &[]),
        ("Q.7", &[]),
        ("Q.11", &[]),
        ("Q.12", &[("a", 1.0)]),
        ("Q.13", &[]),
        ("Q.16", &[]),
    ];
    for &(id, extra) in cases {
        let build = |h: f64| {
            let mut ps = ParamSet::from_pairs(extra).unwrap();
            ps.set("hbar", h).unwrap();
            if id == "Q.12" {
                ps.set("a", h * h).unwrap();
            }
            catalog::instantiate(id, &ps).unwrap()
        };
        let (one, other) = (build(1.0), build(0.75));
        let (xs, ys) = (one.domain.x, one.domain.y);
        for i in 0..9 {
            for j in 0..9 {
                let x = xs.0 + (xs.1 - xs.0) * (i as f64 + 0.5) / 9.0;
                let y = ys.0 + (ys.1 - ys.0) * (j as f64 + 0.5) / 9.0;
                if one.potential.distance_to_singularity(x, y) < 0.05 {
                    continue;
                }
                let (v1, vh) = (one.potential.value(x, y).unwrap(), other.potential.value(x, y).unwrap());
                assert!((vh - 0.5625 * v1).abs() <= 4.0 * f64::EPSILON * v1.abs(), "{id} at ({x}, {y}): {vh} vs {v1}");
            }
        }
    }
}

#[test]
fn classical_limits_land_on_valid_entries() {
    let mut mapped = 0;
    for e in catalog::entries().iter().filter(|e| e.regime == Regime::Quantum) {
        match catalog::classical_limit(e.id, &ParamSet::new()) {
            Ok(limit) => {
                mapped += 1;
                if let LimitTarget::Entry(target) = limit.target {
                    if e.id == "Q.20" {
                        // d = 0 is the degenerate edge of C.8 where the relation factors into V1 = 0 or bx
                        assert_eq!((target, limit.params.get("d")), ("C.8", Some(0.0)));
                        assert!(catalog::instantiate(target, &limit.params).is_err());
                        continue;
                    }
                    let inst = catalog::instantiate(target, &limit.params).unwrap_or_else(|err| panic!("{} -> {target}: {err}", e.id));
                    assert_eq!(inst.regime(), Regime::Classical);
                }
            }
            Err(err) => assert!(matches!(err, Error::NoLimit(_)), "{}: {err}", e.id),
        }
    }
    assert!(mapped >= 15);
    let q18 = ParamSet::from_pairs(&[("K2", 0.5)]).unwrap();
    assert!(matches!(catalog::classical_limit("Q.18", &q18), Err(Error::NoLimit(_))));
    let q18 = ParamSet::from_pairs(&[("K2", 0.0)]).unwrap();
    assert_eq!(catalog::classical_limit("Q.18", &q18).unwrap().target, LimitTarget::Entry("C.1"));
    assert!(catalog::classical_limit("C.1", &ParamSet::new()).is_err());
}

#[test]
fn lookup_and_parameter_validation() {
    assert!(matches!(catalog::find("Q.99"), Err(Error::UnknownEntry(_))));
    assert_eq!(catalog::entries().len(), 29);
    assert_eq!(catalog::list_entries().len(), 29);
    assert!(catalog::instantiate("C.1", &ParamSet::from_pairs(&[("omega", 1.0)]).unwrap()).is_err());
    let doc = catalog::reference_document();
    for e in catalog::entries() {
        assert!(doc.contains(e.id), "{} missing from the reference", e.id);
    }
}

fn closed_form_params() -> Vec<(&'static str, &'static str, f64)> {
    catalog::entries()
        .iter()
        .filter(|e| e.tier == Tier::ClosedForm)
        .flat_map(|e| {
            e.params
                .iter()
                .filter(|p| p.name != "hbar" && p.name != "branch")
                .filter_map(move |p| p.default.filter(|d| *d != 0.0).map(|d| (e.id, p.name, d)))
        })
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn perturbed_parameters_keep_the_integrals(pick in any::<prop::sample::Index>(), factor in 0.8f64..1.25) {
        let table = closed_form_params();
        let (id, name, default) = table[pick.index(table.len())];
        let ps = ParamSet::from_pairs(&[(name, default * factor)]).unwrap();
        let Ok(inst) = catalog::instantiate(id, &ps) else { return Err(TestCaseError::reject("outside the parameter rules")) };
        for (k, x) in inst.integrals.iter().enumerate() {
            let grid = inst.default_grid();
            let Ok(r) = residual_determining(&inst.potential, x, &grid) else { return Err(TestCaseError::reject("grid hits a singular line")) };
            prop_assert!(r.max_abs() <= inst.tolerance(), "{id} {name}={} X{}: {:.3e}", default * factor, k + 1, r.max_abs());
        }
    }
}
