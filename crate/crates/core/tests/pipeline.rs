use zinpaint::dictionary::{collect_dictionary, IndexConfig, MultiIndex};
use zinpaint::inpaint::{
    acceleration_error, inpaint, inpaint_with_index, InpaintConfig, SearchMode,
};
use zinpaint::zcurve::Norm;
use zinpaint::Error;

mod common;

fn config(workers: usize) -> InpaintConfig {
    InpaintConfig {
        index: IndexConfig {
            dims: 8,
            knn: 40,
            ..IndexConfig::default()
        },
        workers,
        ..InpaintConfig::default()
    }
}

#[test]
fn fills_every_hole_and_keeps_known_pixels() {
    let image = common::synthetic_photo(120, 90, 4);
    let mask = common::text_mask(120, 90, 0.15, 4);
    let out = inpaint(&image, &mask, &config(1)).unwrap();
    let ch = image.channels();
    for y in 0..90 {
        for x in 0..120 {
            if mask.is_known(x, y) {
                assert_eq!(out.image.pixel(x, y), image.pixel(x, y));
            }
        }
    }
    let filled: usize = out.records.iter().map(|r| r.filled).sum();
    assert_eq!(filled, mask.unknown_count());
    assert_eq!(out.image.data().len(), 120 * 90 * ch);
    let (lo, hi) = out.confidence_range;
    assert!((0.0..=1.0).contains(&lo) && (0.0..=1.0).contains(&hi) && lo <= hi);
}

#[test]
fn worker_count_does_not_change_the_result() {
    let image = common::synthetic_photo(100, 80, 5);
    let mask = common::text_mask(100, 80, 0.2, 5);
    let one = inpaint(&image, &mask, &config(1)).unwrap();
    for workers in [2, 4] {
        let many = inpaint(&image, &mask, &config(workers)).unwrap();
        assert_eq!(many.image, one.image, "workers = {workers}");
        assert_eq!(
            many.records
                .iter()
                .map(|r| (r.target, r.source))
                .collect::<Vec<_>>(),
            one.records
                .iter()
                .map(|r| (r.target, r.source))
                .collect::<Vec<_>>()
        );
    }
}

#[test]
fn full_candidate_lists_reproduce_the_brute_force_fill() {
    let image = common::synthetic_gray(70, 50, 6);
    let mask = common::box_mask(70, 50, &[(30, 20, 38, 26)]);
    let dict = collect_dictionary(&image, &mask, 9).unwrap().len();
    let mut cfg = config(1);
    cfg.index.knn = dict;
    cfg.oracle = true;
    let accelerated = inpaint(&image, &mask, &cfg).unwrap();
    let ae = acceleration_error(&accelerated.records);
    assert_eq!(ae.mean_percent, Some(0.0));

    let brute = inpaint(
        &image,
        &mask,
        &InpaintConfig {
            mode: SearchMode::BruteForce,
            oracle: false,
            ..cfg
        },
    )
    .unwrap();
    assert_eq!(brute.image, accelerated.image);
}

#[test]
fn prebuilt_index_gives_the_same_fill() {
    let image = common::synthetic_photo(90, 70, 7);
    let mask = common::text_mask(90, 70, 0.2, 7);
    let cfg = config(1);
    let direct = inpaint(&image, &mask, &cfg).unwrap();
    let (multi, stats) = MultiIndex::build(&image, &mask, &cfg.index).unwrap();
    assert_eq!(stats.dictionary_size, multi.dictionary_size());
    let reused = inpaint_with_index(&image, &mask, &multi, &cfg).unwrap();
    assert_eq!(reused.image, direct.image);
}

#[test]
fn l1_norm_runs_end_to_end() {
    let image = common::synthetic_photo(80, 60, 8);
    let mask = common::text_mask(80, 60, 0.2, 8);
    let mut cfg = config(1);
    cfg.index.norm = Norm::L1;
    cfg.index.dims = 14;
    let out = inpaint(&image, &mask, &cfg).unwrap();
    assert_eq!(
        out.records.iter().map(|r| r.filled).sum::<usize>(),
        mask.unknown_count()
    );
}

#[test]
fn no_complete_window_is_reported() {
    let image = common::synthetic_gray(20, 20, 9);
    let mask = common::box_mask(20, 20, &[(8, 8, 11, 11)]);
    let mut cfg = config(1);
    cfg.index.patch_size = 15;
    cfg.index.dims = 4;
    assert!(matches!(
        inpaint(&image, &mask, &cfg),
        Err(Error::EmptyDictionary(15))
    ));
}

#[test]
fn enlarged_canvas_grows_the_texture_outward() {
    let texture = common::synthetic_photo(40, 40, 10);
    let (w, h, pad) = (60, 56, 10);
    let mut data = vec![0u8; w * h * 3];
    let mut mask = zinpaint::image::MaskImage::all_unknown(w, h);
    for y in 0..40 {
        for x in 0..40 {
            let at = ((y + pad) * w + x + pad) * 3;
            data[at..at + 3].copy_from_slice(texture.pixel(x, y));
            mask.set_known(x + pad, y + pad, true);
        }
    }
    let canvas = zinpaint::image::RasterImage::new(w, h, 3, data).unwrap();
    let out = inpaint(&canvas, &mask, &config(1)).unwrap();
    assert_eq!(
        out.records.iter().map(|r| r.filled).sum::<usize>(),
        w * h - 1600
    );
    for y in 0..40 {
        for x in 0..40 {
            assert_eq!(out.image.pixel(x + pad, y + pad), texture.pixel(x, y));
        }
    }
}
