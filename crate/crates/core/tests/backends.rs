mod support;

use sscomp::backends::{
    compile, compile_flat, compile_flat_with, compile_grid, compile_nested, parse_space, serialize_space, Backend,
    CompileOptions, CompiledSpace,
};
use sscomp::normalize::{grid_contains, Dimension};
use sscomp::operators::Registry;
use sscomp::pipeline::op;
use sscomp::search::{sample_point, trial_rng};
use sscomp::Error;

fn random_pipelines(n: usize, seed: u64) -> Vec<sscomp::pipeline::PipelineExpr> {
    let reg = Registry::bundled();
    let names: Vec<&str> = reg.names().collect();
    let mut rng = support::rng(seed);
    (0..n).map(|_| support::random_pipeline(&mut rng, &names, 4, 3)).collect()
}

#[test]
fn every_backend_roundtrips_through_text() {
    let reg = Registry::bundled();
    for p in random_pipelines(15, 1) {
        for backend in [Backend::Flat, Backend::Grid, Backend::Nested] {
            let space = compile(&p, &reg, backend, &CompileOptions::default()).unwrap();
            let text = serialize_space(&space);
            assert_eq!(parse_space(&text).unwrap(), space, "{p} {backend}");
            assert_eq!(serialize_space(&parse_space(&text).unwrap()), text);
        }
    }
}

#[test]
fn nested_flattens_to_flat() {
    let reg = Registry::bundled();
    for p in random_pipelines(15, 2) {
        let flat = compile_flat(&p, &reg).unwrap();
        let nested = compile_nested(&p, &reg).unwrap();
        assert!(support::same_disjuncts(&nested.flatten().unwrap(), &flat.disjuncts), "{p}");
        assert_eq!(nested.count(), flat.disjuncts.len());
    }
}

#[test]
fn grid_erases_to_flat_and_stays_inside_it() {
    let reg = Registry::bundled();
    for (i, p) in random_pipelines(10, 3).into_iter().enumerate() {
        let flat = compile_flat(&p, &reg).unwrap();
        let grid = compile_grid(&p, &reg, 3, i as u64).unwrap();
        assert_eq!(grid.erase(), flat, "{p}");
        assert!(grid.disjuncts.iter().all(|g| g.values().all(Dimension::is_categorical)));
        let space = CompiledSpace::Grid(grid.clone());
        for n in 0..50 {
            let point = sample_point(&space, &mut trial_rng(i as u64, n)).unwrap();
            assert!(flat.disjuncts.iter().any(|g| grid_contains(g, &point)), "{p}: {point:?}");
        }
    }
}

#[test]
fn grid_discretization_depends_only_on_seed() {
    let reg = Registry::bundled();
    let p = op("PCA") >> (op("J48") | op("LogReg"));
    assert_eq!(compile_grid(&p, &reg, 4, 1).unwrap(), compile_grid(&p, &reg, 4, 1).unwrap());
    assert_ne!(compile_grid(&p, &reg, 4, 1).unwrap(), compile_grid(&p, &reg, 4, 2).unwrap());
    assert!(matches!(compile_grid(&p, &reg, 0, 1), Err(Error::Config(_))));
}

#[test]
fn repeated_operators_get_numbered_names() {
    let reg = Registry::bundled();
    let space = compile_flat(&(op("PCA") >> op("PCA")), &reg).unwrap();
    let keys: Vec<&String> = space.disjuncts[0].keys().collect();
    assert_eq!(keys, vec!["PCA_1__N", "PCA_2__N"]);
    assert_eq!(space.disjuncts.len(), 4);
}

#[test]
fn clashing_names_are_reported() {
    let reg = Registry::bundled();
    let p = op("KNN") >> (op("KNN") | op("Stump").named("KNN_1"));
    assert!(matches!(compile_flat(&p, &reg), Err(Error::NameCollision(_))));
}

#[test]
fn cap_applies_to_pipeline_products() {
    let reg = Registry::bundled();
    let p = op("PCA") >> op("J48") >> op("LR") >> op("Scaler");
    assert_eq!(compile_flat(&p, &reg).unwrap().disjuncts.len(), 16);
    let opts = CompileOptions {
        disjunct_cap: 15,
        ..CompileOptions::default()
    };
    assert!(matches!(compile_flat_with(&p, &reg, &opts), Err(Error::Explosion { .. })));
}

#[test]
fn unknown_operators_are_reported() {
    let reg = Registry::bundled();
    assert!(matches!(compile_flat(&op("Nope"), &reg), Err(Error::UnknownOperator(_))));
}
