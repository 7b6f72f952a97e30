use chromaharmony::srgb::{color_to_srgb, lch_to_srgb8, srgb8_to_lch, srgb_to_color};
use chromaharmony::Color;

fn channels() -> impl Iterator<Item = u8> + Clone {
    (0..=255u8).step_by(17)
}

#[test]
fn strided_round_trip_within_one_level() {
    let mut worst = 0u8;
    for r in channels() {
        for g in channels() {
            for b in channels() {
                let out = lch_to_srgb8(srgb8_to_lch([r, g, b]));
                assert!(out.in_gamut, "{:?}", [r, g, b]);
                for (x, y) in [r, g, b].into_iter().zip(out.rgb) {
                    worst = worst.max(x.abs_diff(y));
                }
            }
        }
    }
    assert!(worst <= 1, "max channel error {worst}");
}

#[test]
fn unclamped_colors_round_trip_through_engine_type() {
    for r in channels() {
        for g in channels() {
            for b in channels() {
                let conv = srgb_to_color(r, g, b);
                if conv.chroma_clamped {
                    continue;
                }
                let back = color_to_srgb(&conv.color);
                for (x, y) in [r, g, b].into_iter().zip(back.rgb) {
                    assert!(x.abs_diff(y) <= 1, "{:?} -> {:?}", [r, g, b], back.rgb);
                }
            }
        }
    }
}

#[test]
fn in_gamut_colors_survive_quantization() {
    // Half a code value moves L by < 0.5 but a*/b* by up to ~0.85 in dark
    // blues and purples. Hue is compared as the arc length c * Δh, which stays
    // bounded where Δh itself cannot be near the gray axis.
    let mut worst = (0.0f64, 0.0f64, 0.0f64);
    for li in 1..20 {
        for ci in 0..=20 {
            for hi in 0..36 {
                let Ok(x) = Color::new(li as f64 * 5.0, ci as f64 * 5.0, hi as f64 * 10.0) else {
                    continue;
                };
                let rendering = color_to_srgb(&x);
                if !rendering.in_gamut {
                    continue;
                }
                let [r, g, b] = rendering.rgb;
                let y = srgb_to_color(r, g, b).color;
                let dh = chromaharmony::hue::central_angle(x.h, y.h);
                worst.0 = worst.0.max((x.l - y.l).abs());
                worst.1 = worst.1.max((x.c - y.c).abs());
                worst.2 = worst.2.max(x.c.min(y.c) * dh.to_radians());
                if x.c >= 60.0 {
                    assert!(dh <= 0.5, "{x:?} -> {y:?}");
                }
            }
        }
    }
    assert!(worst.0 <= 0.5, "{worst:?}");
    assert!(worst.1 <= 0.9, "{worst:?}");
    assert!(worst.2 <= 0.9, "{worst:?}");
}
