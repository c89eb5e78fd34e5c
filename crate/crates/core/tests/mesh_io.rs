use meshsteg::error::ParseError;
use meshsteg::fixtures;
use meshsteg::mesh::{parse_mesh, read_mesh, write_mesh, Mesh, MeshFormat};
use meshsteg::quant::{detect_k_star, to_fixed};
use proptest::prelude::*;

fn arb_mesh() -> impl Strategy<Value = (Mesh, u32)> {
    (3usize..40, 1u32..=8, any::<u64>()).prop_map(|(n, k, seed)| {
        let base = fixtures::fan(n);
        let m = fixtures::jittered(&base, 0.37, seed);
        (fixtures::quantized(&m, k), k)
    })
}

fn same_fixed(a: &Mesh, b: &Mesh, k: u32) -> bool {
    a.vertices().iter().zip(b.vertices()).all(|(p, q)| {
        (0..3).all(|j| to_fixed(p[j], k).unwrap() == to_fixed(q[j], k).unwrap())
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn write_then_parse_is_lossless((mesh, k) in arb_mesh(), ply in any::<bool>()) {
        let fmt = if ply { MeshFormat::Ply } else { MeshFormat::Off };
        let text = write_mesh(&mesh, fmt, k);
        let back = parse_mesh(&text, fmt).unwrap();
        prop_assert_eq!(back.faces(), mesh.faces());
        prop_assert!(same_fixed(&mesh, &back, k));
        prop_assert!(detect_k_star(&back) <= k);
        // rendering again gives the same bytes
        prop_assert_eq!(write_mesh(&back, fmt, k), text);
    }

    #[test]
    fn garbage_never_panics(text in "\\PC{0,200}") {
        let _ = parse_mesh(&text, MeshFormat::Off);
        let _ = parse_mesh(&text, MeshFormat::Ply);
    }
}

#[test]
fn files_by_extension() {
    let dir = tempfile::tempdir().unwrap();
    let mesh = fixtures::quantized(&fixtures::torus(8, 6, 1.0, 0.25), 5);
    for fmt in [MeshFormat::Off, MeshFormat::Ply] {
        let path = dir.path().join(format!("t.{}", fmt.extension()));
        std::fs::write(&path, write_mesh(&mesh, fmt, 5)).unwrap();
        let (back, got) = read_mesh(&path).unwrap();
        assert_eq!(got, fmt);
        assert_eq!(back.vertex_count(), 48);
        assert_eq!(detect_k_star(&back), 5);
    }
    assert!(matches!(read_mesh(&dir.path().join("missing.off")), Err(ParseError::Io(_))));
}
