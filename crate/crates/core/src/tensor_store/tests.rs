use super::*;
use crate::closed_form::element_direct;
use crate::index::orbit;
use std::path::Path;

fn opts(cutoff: BasisCutoff) -> BuildOptions {
    BuildOptions::new(cutoff)
}

#[test]
fn basis_order_and_size() {
    let b = BasisCutoff::Shells(2).basis();
    assert_eq!(b.len(), 10);
    assert_eq!(b[0], QuantumTriple::ZERO);
    assert_eq!(b[1], QuantumTriple::new(0, 0, 1));
    assert_eq!(b[3], QuantumTriple::new(1, 0, 0));
    assert_eq!(b[4], QuantumTriple::new(0, 0, 2));
    assert_eq!(BasisCutoff::PerAxis(2).basis().len(), 27);
    for c in [BasisCutoff::Shells(3), BasisCutoff::PerAxis(1)] {
        assert_eq!(c.basis().len() as u128, c.basis_size());
    }
}

#[test]
fn burnside_count_matches_enumeration() {
    for c in [BasisCutoff::Shells(0), BasisCutoff::Shells(1), BasisCutoff::PerAxis(1)] {
        let basis = c.basis();
        let mut n = 0u128;
        for &a in &basis {
            for &b in &basis {
                for &cc in &basis {
                    for &d in &basis {
                        n += is_canonical(&ElementKey::new(a, b, cc, d)) as u128;
                    }
                }
            }
        }
        assert_eq!(n, c.canonical_key_count(), "{c}");
    }
}

#[test]
fn too_large_is_refused() {
    let err = canonical_keys(BasisCutoff::PerAxis(40), DEFAULT_KEY_LIMIT).unwrap_err();
    assert!(matches!(err, Error::TooLarge { .. }));
    assert!(canonical_keys(BasisCutoff::Shells(1), 10).is_err());
}

#[test]
fn ground_state_cutoff() {
    let t = build_tensor(&opts(BasisCutoff::Shells(0))).unwrap();
    assert_eq!(t.len(), 1);
    let v = t.lookup(&ElementKey::default()).unwrap();
    assert!((v - 0.7978845608028654).abs() < 1e-15);
}

#[test]
fn lookup_through_orbit() {
    let t = build_tensor(&opts(BasisCutoff::Shells(2))).unwrap();
    let k = ElementKey::from_indices([1, 0, 0, 0, 1, 0, 0, 0, 1, 0, 0, 1]);
    let direct = element_direct(&k, OscillatorScale::unit(), Backend::Float).unwrap().value;
    for m in orbit(&k) {
        assert_eq!(t.lookup(&m).unwrap(), direct, "{m}");
    }
    // parity-forbidden key inside the cutoff
    let z = ElementKey::from_indices([1, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0]);
    assert_eq!(t.lookup(&z).unwrap(), 0.0);
    let out = ElementKey::from_indices([3, 0, 0, 0, 0, 0, 0, 0, 0, 1, 0, 0]);
    assert!(matches!(t.lookup(&out), Err(Error::OutOfCutoff { .. })));
}

#[test]
fn workers_do_not_change_output() {
    let mut o = opts(BasisCutoff::Shells(2));
    let one = build_tensor(&o).unwrap().to_binary().unwrap();
    o.workers = 3;
    assert_eq!(build_tensor(&o).unwrap().to_binary().unwrap(), one);
    o.workers = 0;
    assert!(build_tensor(&o).is_err());
}

#[test]
fn strategies_agree() {
    for backend in [Backend::Float, Backend::Exact] {
        let mut o = opts(BasisCutoff::PerAxis(1));
        o.backend = backend;
        let direct = build_tensor(&o).unwrap();
        o.strategy = Strategy::Recurrence;
        let rec = build_tensor(&o).unwrap();
        assert_eq!(direct.len(), rec.len());
        for ((k1, v1), (k2, v2)) in direct.elements().zip(rec.elements()) {
            assert_eq!(k1, k2);
            assert!((v1 - v2).abs() <= 1e-13 * v1.abs(), "{k1}: {v1} vs {v2}");
        }
    }
}

#[test]
fn exact_backend_round_trips_all_formats() {
    let mut o = opts(BasisCutoff::Shells(1));
    o.backend = Backend::Exact;
    o.scale = OscillatorScale::new(1.3).unwrap();
    let t = build_tensor(&o).unwrap();
    for f in [ExportFormat::Binary, ExportFormat::Json, ExportFormat::Csv] {
        let bytes = t.encode(f).unwrap();
        let back = Tensor::decode(&bytes, f).unwrap();
        assert_eq!(back, t, "{f:?}");
        assert_eq!(back.encode(f).unwrap(), bytes);
    }
}

#[test]
fn digest_shared_across_formats() {
    let t = build_tensor(&opts(BasisCutoff::Shells(1))).unwrap();
    let d = t.digest().unwrap();
    assert!(t.to_json_string().unwrap().contains(&d));
    assert!(t.to_csv_string().unwrap().contains(&format!("# digest {d}")));
    let bin = t.to_binary().unwrap();
    assert_eq!(hex::encode(&bin[bin.len() - 32..]), d);
}

#[test]
fn binary_rejects_damage() {
    let t = build_tensor(&opts(BasisCutoff::Shells(1))).unwrap();
    let bin = t.to_binary().unwrap();

    let mut bad = bin.clone();
    bad[0] = b'X';
    assert!(matches!(Tensor::from_binary(&bad), Err(Error::BadMagic)));

    let mut bad = bin.clone();
    bad[4] = 9;
    assert!(matches!(Tensor::from_binary(&bad), Err(Error::UnsupportedVersion(9))));

    assert!(matches!(Tensor::from_binary(&bin[..bin.len() - 1]), Err(Error::Truncated(_))));
    assert!(matches!(Tensor::from_binary(&bin[..10]), Err(Error::Truncated(_))));

    let mut bad = bin.clone();
    let mid = format::HEADER_LEN + 15;
    bad[mid] ^= 1;
    assert!(matches!(Tensor::from_binary(&bad), Err(Error::DigestMismatch { .. })));

    let mut long = bin.clone();
    long.push(0);
    assert!(Tensor::from_binary(&long).is_err());
}

#[test]
fn text_formats_reject_damage() {
    let t = build_tensor(&opts(BasisCutoff::Shells(1))).unwrap();
    let json = t.to_json_string().unwrap();
    let tampered = json.replacen("e-1\"", "e-2\"", 1);
    assert!(matches!(Tensor::from_json_str(&tampered), Err(Error::DigestMismatch { .. })));
    assert!(Tensor::from_json_str("{}").is_err());

    let csv = t.to_csv_string().unwrap();
    let no_meta: String = csv.lines().filter(|l| !l.starts_with("# scale")).map(|l| format!("{l}\n")).collect();
    assert!(matches!(Tensor::from_csv_str(&no_meta), Err(Error::Format(_))));
    assert!(matches!(Tensor::from_csv_str("nx1\n"), Err(Error::BadMagic)));
    let v2 = csv.replacen("# format oscv 1", "# format oscv 2", 1);
    assert!(matches!(Tensor::from_csv_str(&v2), Err(Error::UnsupportedVersion(2))));
}

#[test]
fn from_elements_validation() {
    let c = BasisCutoff::Shells(1);
    let s = OscillatorScale::unit();
    let canon = ElementKey::from_indices([0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 1]);
    let noncanon = ElementKey::from_indices([0, 0, 1, 0, 0, 0, 0, 0, 0, 0, 0, 0]);
    assert!(Tensor::from_elements(c, s, Backend::Float, [(canon, 1.0)]).is_ok());
    assert!(Tensor::from_elements(c, s, Backend::Float, [(noncanon, 1.0)]).is_err());
    assert!(Tensor::from_elements(c, s, Backend::Float, [(canon, 0.0)]).is_err());
    assert!(Tensor::from_elements(c, s, Backend::Float, [(canon, f64::NAN)]).is_err());
    assert!(Tensor::from_elements(c, s, Backend::Float, [(canon, 1.0), (canon, 2.0)]).is_err());
    let far = ElementKey::from_indices([2, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0]);
    assert!(matches!(
        Tensor::from_elements(c, s, Backend::Float, [(far, 1.0)]),
        Err(Error::OutOfCutoff { .. })
    ));
}

#[test]
fn format_names() {
    assert_eq!("csv".parse::<ExportFormat>().unwrap(), ExportFormat::Csv);
    assert!("xml".parse::<ExportFormat>().is_err());
    assert_eq!(ExportFormat::from_path(Path::new("a/b.json")), Some(ExportFormat::Json));
    assert_eq!(ExportFormat::from_path(Path::new("t.oscv")), Some(ExportFormat::Binary));
    assert_eq!(ExportFormat::from_path(Path::new("t")), None);
    assert_eq!("recurrence".parse::<Strategy>().unwrap(), Strategy::Recurrence);
}
