use lblab_core::data::{load_csv, simplex_means, write_csv, MEAN_SEPARATION};
use lblab_core::{make_blobs, BlobParams, CsvSchema, DifficultyTag};
use proptest::prelude::*;
use std::collections::HashSet;

fn nearest(row: &[f64], means: &[Vec<f64>]) -> usize {
    let d = |m: &Vec<f64>| row.iter().zip(m).map(|(a, b)| (a - b).powi(2)).sum::<f64>();
    (0..means.len()).min_by(|&a, &b| d(&means[a]).total_cmp(&d(&means[b]))).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn generated_datasets_are_valid(
        classes in 2usize..6,
        extra_dim in 0usize..4,
        per_class in 1usize..40,
        spread in 0.01f64..2.0,
        noise in 0.0f64..0.9,
        seed in any::<u64>(),
    ) {
        let p = BlobParams { classes, dim: classes - 1 + extra_dim, per_class, spread, label_noise: noise, seed };
        let d = make_blobs(&p).unwrap();
        let n = classes * per_class;
        prop_assert_eq!(d.len(), n);
        prop_assert_eq!(d.features().len(), n * p.dim);
        prop_assert!(d.labels().iter().all(|&l| l >= 1 && l as usize <= classes));
        let ids: HashSet<_> = d.sample_ids().iter().collect();
        prop_assert_eq!(ids.len(), n);
        let noisy = d.indices_tagged(DifficultyTag::Noisy).len();
        prop_assert_eq!(noisy, (noise * n as f64).round() as usize);
    }

    #[test]
    fn clean_tight_blobs_are_nearest_mean_separable(
        classes in 2usize..6,
        per_class in 1usize..60,
        frac in 0.001f64..0.05,
        seed in any::<u64>(),
    ) {
        let p = BlobParams {
            classes, dim: classes, per_class,
            spread: frac * MEAN_SEPARATION, label_noise: 0.0, seed,
        };
        let d = make_blobs(&p).unwrap();
        let means = simplex_means(classes, classes, MEAN_SEPARATION);
        for i in 0..d.len() {
            prop_assert_eq!(nearest(d.row(i), &means), d.class_index(i));
        }
    }
}

#[test]
fn csv_file_round_trip() {
    let d = make_blobs(&BlobParams::preset("standard").unwrap()).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("blobs.csv");
    let mut f = std::fs::File::create(&path).unwrap();
    write_csv(&d, &mut f).unwrap();
    drop(f);
    assert_eq!(load_csv(&path, &CsvSchema::tagged()).unwrap(), d);
}

#[test]
fn missing_file_is_io_error() {
    assert!(matches!(
        load_csv("/nonexistent/x.csv", &CsvSchema::default()),
        Err(lblab_core::Error::Io(_))
    ));
}
