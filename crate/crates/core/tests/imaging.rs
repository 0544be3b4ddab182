use iconix_core::imaging::{binarize, downsample, reference_perceptual_distance};
use iconix_core::{BinaryMask, Channels, Raster};
use proptest::prelude::*;

fn arb_gray(max_side: u32) -> impl Strategy<Value = Raster> {
    (1..=max_side, 1..=max_side).prop_flat_map(|(w, h)| {
        prop::collection::vec(any::<u8>(), (w * h) as usize).prop_map(move |d| Raster::gray(w, h, d).unwrap())
    })
}

#[test]
fn bad_dimensions_are_rejected() {
    assert!(Raster::gray(0, 3, vec![]).is_err());
    assert!(Raster::gray(2, 2, vec![0; 3]).is_err());
    assert!(Raster::new(1, 1, Channels::Rgba8, vec![0; 3]).is_err());
}

proptest! {
    #[test]
    fn binarize_grows_with_threshold(img in arb_gray(16), a in any::<u8>(), b in any::<u8>()) {
        let (lo, hi) = (a.min(b), a.max(b));
        let (m_lo, m_hi) = (binarize(&img, lo), binarize(&img, hi));
        for i in 0..m_lo.len() {
            prop_assert!(!m_lo.get_index(i) || m_hi.get_index(i));
        }
        for i in 0..img.pixel_count() {
            prop_assert_eq!(m_hi.get_index(i), img.data()[i] < hi);
        }
    }

    #[test]
    fn perceptual_distance_is_a_bounded_symmetric_premetric(a in arb_gray(40), seed in any::<u64>()) {
        let b_data: Vec<u8> = a.data().iter().enumerate().map(|(i, v)| v.wrapping_add((seed >> (i % 56)) as u8)).collect();
        let b = Raster::gray(a.width(), a.height(), b_data).unwrap();
        let ab = reference_perceptual_distance(&a, &b).unwrap();
        prop_assert!((0.0..=1.0).contains(&ab));
        prop_assert_eq!(ab, reference_perceptual_distance(&b, &a).unwrap());
        prop_assert_eq!(reference_perceptual_distance(&a, &a).unwrap(), 0.0);
    }

    #[test]
    fn downsampling_a_uniform_image_keeps_its_value(v in any::<u8>(), w in 1u32..64, h in 1u32..64, tw in 1u32..40, th in 1u32..40) {
        let img = Raster::filled(w, h, Channels::Gray8, &[v]).unwrap();
        let out = downsample(&img, tw, th).unwrap();
        prop_assert_eq!(out.dimensions(), (tw, th));
        prop_assert!(out.data().iter().all(|&p| p == v));
    }

    #[test]
    fn gray_rgba_round_trip(img in arb_gray(12)) {
        prop_assert_eq!(img.to_rgba().to_gray(), img);
    }

    #[test]
    fn crop_and_blit_round_trip(img in arb_gray(12), x in 0u32..12, y in 0u32..12) {
        prop_assume!(x < img.width() && y < img.height());
        let piece = img.crop(x, y, img.width() - x, img.height() - y).unwrap();
        let mut canvas = Raster::filled(img.width(), img.height(), Channels::Gray8, &[0]).unwrap();
        canvas.blit(&piece, x, y).unwrap();
        for yy in y..img.height() {
            for xx in x..img.width() {
                prop_assert_eq!(canvas.pixel(xx, yy), img.pixel(xx, yy));
            }
        }
    }

    #[test]
    fn mask_runs_round_trip(w in 1u32..20, h in 1u32..20, bits in prop::collection::vec(any::<bool>(), 400)) {
        let mask = BinaryMask::from_fn(w, h, |x, y| bits[(y * 20 + x) as usize]);
        prop_assert_eq!(BinaryMask::from_runs(w, h, &mask.runs()), Some(mask.clone()));
        prop_assert_eq!(mask.area(), mask.recount());
    }
}
