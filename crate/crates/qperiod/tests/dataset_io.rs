use std::io::Cursor;

use proptest::prelude::*;
use qperiod::batch::{self, FeatureParams};
use qperiod::dataset::{read_records, write_records, DatasetRecord, Variety, PREFIX_LEN};
use qperiod::persist::{load_model, save_model, ModelFile};
use qperiod::Error;
use qperiod_core::generate::{Collector, GenConfig, Rank2Candidate, Rank2Collector};
use qperiod_core::learn::{Model, ModelSpec, SvmConfig};
use qperiod_core::terminality::{fan_invariant, rank2_fan};
use qperiod_core::varieties::{WeightMatrix, WeightVector};

fn finite() -> impl Strategy<Value = f64> {
    prop_oneof![
        any::<f64>().prop_filter("finite", |x| x.is_finite()),
        Just(0.0),
        Just(-0.0),
        Just(f64::MIN_POSITIVE),
        Just(5e-324),
    ]
}

fn record(v: Variety, xs: [f64; 6], prefix: Option<Vec<f64>>) -> DatasetRecord {
    DatasetRecord {
        dim: v.dimension(),
        variety: v,
        slope: xs[0],
        intercept: xs[1],
        se_slope: xs[2],
        se_int: xs[3],
        a: xs[4],
        b: xs[5],
        log_prefix: prefix,
    }
}

fn p1xp1() -> Variety {
    Variety::Rank2(WeightMatrix::validate_rank2(&[1, 1, 0, 0], &[0, 0, 1, 1]).unwrap())
}

proptest! {
    #[test]
    fn records_round_trip_bit_exactly(
        xs in proptest::array::uniform6(finite()),
        prefix in proptest::option::of(proptest::collection::vec(finite(), PREFIX_LEN)),
        wps in any::<bool>(),
    ) {
        let v = if wps { Variety::Wps(WeightVector::validate_wps(&[1, 2, 3, 3]).unwrap()) } else { p1xp1() };
        let r = record(v, xs, prefix);
        let mut buf = Vec::new();
        write_records(&mut buf, std::slice::from_ref(&r)).unwrap();
        let back = read_records(Cursor::new(buf)).unwrap();
        prop_assert_eq!(back.len(), 1);
        let b = &back[0];
        let bits = |r: &DatasetRecord| -> Vec<u64> {
            let mut v: Vec<u64> = [r.slope, r.intercept, r.se_slope, r.se_int, r.a, r.b].iter().map(|x| x.to_bits()).collect();
            v.extend(r.log_prefix.iter().flatten().map(|x| x.to_bits()));
            v
        };
        prop_assert_eq!(bits(b), bits(&r));
        prop_assert_eq!(&b.variety, &r.variety);
        prop_assert_eq!(b.log_prefix.is_some(), r.log_prefix.is_some());
    }
}

fn good_line() -> String {
    record(p1xp1(), [1.0, 2.0, 0.1, 0.2, 1.38, -0.45], None).to_json_line()
}

#[test]
fn missing_key_is_named() {
    let mut obj: serde_json::Map<String, serde_json::Value> = serde_json::from_str(&good_line()).unwrap();
    obj.remove("se_int");
    let text = serde_json::to_string(&obj).unwrap();
    let err = DatasetRecord::from_json_line(&text, 7).unwrap_err();
    assert!(matches!(err, Error::MissingKey { line: 7, key: "se_int" }), "{err}");
    assert!(err.to_string().contains("se_int"));
}

#[test]
fn errors_carry_the_line_number() {
    let good = good_line();
    let input = format!("{good}\n\n{good}\n{}\n", good.replace("\"dim\":2", "\"dim\":5"));
    let err = read_records(Cursor::new(input)).unwrap_err();
    assert!(err.to_string().starts_with("line 4:"), "{err}");

    let err = read_records(Cursor::new(format!("{good}\n{{not json\n"))).unwrap_err();
    assert!(err.to_string().starts_with("line 2:"), "{err}");
}

#[test]
fn malformed_records_are_rejected() {
    let good = good_line();
    for bad in [
        good.replace("\"slope\"", "\"slop\""),
        good.replace("[1,1,0,0]", "[1,1,0,-1]"),
        good.replace("\"rank2\"", "\"toric\""),
        good.replace('}', ",\"log_prefix\":[1.0,2.0]}"),
    ] {
        assert!(DatasetRecord::from_json_line(&bad, 1).is_err(), "{bad}");
    }
}

#[test]
fn permuted_duplicates_collapse() {
    let w = WeightMatrix::validate_rank2(&[1, 1, 2, 0, 0], &[0, 0, 1, 1, 1]).unwrap();
    let candidate = |m: WeightMatrix| {
        let fan = rank2_fan(&m).unwrap();
        let invariant = fan_invariant(&fan).unwrap();
        Rank2Candidate { matrix: m, fan, invariant }
    };
    let mut c = Rank2Collector::default();
    assert!(c.offer(candidate(w.clone())));
    assert!(!c.offer(candidate(w.permute_columns(&[4, 2, 0, 3, 1]).unwrap())));
    assert!(!c.offer(candidate(w.permute_columns(&[1, 0, 2, 4, 3]).unwrap())));
    assert_eq!(c.items.len(), 1);
}

#[test]
fn generation_ignores_thread_count() {
    let run = |threads: usize| {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        pool.install(|| {
            let wps = batch::gen_wps(&GenConfig::wps(200, 3, 7, 5)).unwrap().0;
            let r2 = batch::gen_rank2(&GenConfig::rank2(80, 4, 6, 5)).unwrap().0;
            let vs: Vec<Variety> = r2.iter().take(10).cloned().map(Variety::Rank2).collect();
            let params = FeatureParams::rank2_desk().with_window(qperiod_core::features::Window { lo: 100, hi: 600, stride: 10 });
            let params = FeatureParams { d_max: 600, ..params };
            let recs: Vec<String> =
                batch::compute_records(&vs, &params).into_iter().map(|r| r.unwrap().to_json_line()).collect();
            (wps, r2, recs)
        })
    };
    assert_eq!(run(1), run(4));
}

#[test]
fn model_file_round_trips() {
    let x: Vec<Vec<f64>> = (0..30).map(|i| vec![i as f64, (i % 7) as f64]).collect();
    let y: Vec<usize> = (0..30).map(|i| if i < 15 { 3 } else { 4 }).collect();
    let spec = ModelSpec::Svm(SvmConfig::default());
    let model = Model::fit(&spec, &x, &y, 0).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("m.json");
    save_model(&path, &ModelFile::new(spec, 2, 0, model.clone())).unwrap();
    let back = load_model(&path).unwrap();
    assert_eq!(back.model.predict(&x).unwrap(), model.predict(&x).unwrap());
    assert_eq!(back.n_features, 2);

    let text = std::fs::read_to_string(&path).unwrap().replace("qperiod-model", "other");
    std::fs::write(&path, text).unwrap();
    assert!(matches!(load_model(&path), Err(Error::ModelFile(_))));
}
