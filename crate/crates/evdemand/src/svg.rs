//! Standalone SVG renderer for daily profile overlays: one polyline per
//! profile over a 24 h axis, with grid lines and a legend. No external
//! renderer is involved; the output is deterministic for equal inputs.

use std::error::Error;
use std::fmt;

use crate::profile::DemandProfile;

const WIDTH: f64 = 880.0;
const HEIGHT: f64 = 520.0;
const MARGIN_LEFT: f64 = 72.0;
const MARGIN_RIGHT: f64 = 28.0;
const MARGIN_TOP: f64 = 40.0;
const MARGIN_BOTTOM: f64 = 58.0;

const PALETTE: [&str; 6] =
    ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];

/// Errors building a chart.
#[derive(Debug)]
pub enum SvgError {
    NoProfiles,
    GridMismatch(String),
}

impl fmt::Display for SvgError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SvgError::NoProfiles => f.write_str("no profiles to draw"),
            SvgError::GridMismatch(msg) => write!(f, "grid mismatch: {msg}"),
        }
    }
}

impl Error for SvgError {}

/// Rounds a raw tick step up to a 1/2/5 multiple of a power of ten.
fn nice_step(raw: f64) -> f64 {
    let mag = 10.0_f64.powf(raw.abs().log10().floor());
    let frac = raw / mag;
    let nice = if frac <= 1.0 {
        1.0
    } else if frac <= 2.0 {
        2.0
    } else if frac <= 5.0 {
        5.0
    } else {
        10.0
    };
    nice * mag
}

fn fmt_tick(v: f64) -> String {
    if v == 0.0 {
        return "0".into();
    }
    if v >= 10.0 {
        format!("{v:.0}")
    } else if v >= 1.0 {
        let s = format!("{v:.1}");
        s.strip_suffix(".0").map(str::to_owned).unwrap_or(s)
    } else {
        format!("{v:.2}")
    }
}

/// Renders an overlay chart of one or more profiles sharing a grid.
/// Axes are hours (x, 0..24) and kW (y, from zero).
pub fn render_overlay(
    title: &str,
    profiles: &[(&str, &DemandProfile)],
) -> Result<String, SvgError> {
    let Some((_, first)) = profiles.first() else {
        return Err(SvgError::NoProfiles);
    };
    for (label, p) in profiles {
        if p.n_bins() != first.n_bins() || p.resolution_h() != first.resolution_h() {
            return Err(SvgError::GridMismatch(format!(
                "profile '{label}' has {} bins at {} h, expected {} at {} h",
                p.n_bins(),
                p.resolution_h(),
                first.n_bins(),
                first.resolution_h()
            )));
        }
    }
    let plot_w = WIDTH - MARGIN_LEFT - MARGIN_RIGHT;
    let plot_h = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM;
    let y_data_max = profiles
        .iter()
        .flat_map(|(_, p)| p.values_kw())
        .fold(0.0_f64, |m, &v| m.max(v));
    let y_step = nice_step(if y_data_max > 0.0 { y_data_max / 5.0 } else { 0.2 });
    let y_max = {
        let mut top = y_step;
        while top < y_data_max * 1.02 {
            top += y_step;
        }
        top
    };
    let x_of = |t: f64| MARGIN_LEFT + t / 24.0 * plot_w;
    let y_of = |v: f64| MARGIN_TOP + plot_h - v / y_max * plot_h;

    let mut s = String::with_capacity(16 * 1024);
    s.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 {WIDTH} {HEIGHT}\" \
         font-family=\"sans-serif\" font-size=\"13\">\n"
    ));
    s.push_str(&format!("<title>{}</title>\n", escape(title)));
    s.push_str(&format!(
        "<rect x=\"0\" y=\"0\" width=\"{WIDTH}\" height=\"{HEIGHT}\" fill=\"white\"/>\n"
    ));
    s.push_str(&format!(
        "<text x=\"{:.1}\" y=\"24\" text-anchor=\"middle\" font-size=\"16\">{}</text>\n",
        MARGIN_LEFT + plot_w / 2.0,
        escape(title)
    ));

    // horizontal grid + y tick labels
    let mut v = 0.0;
    while v <= y_max + 1e-9 {
        let y = y_of(v);
        s.push_str(&format!(
            "<line x1=\"{:.1}\" y1=\"{y:.1}\" x2=\"{:.1}\" y2=\"{y:.1}\" \
             stroke=\"#dddddd\" stroke-width=\"1\"/>\n",
            MARGIN_LEFT,
            MARGIN_LEFT + plot_w
        ));
        s.push_str(&format!(
            "<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"end\">{}</text>\n",
            MARGIN_LEFT - 8.0,
            y + 4.0,
            fmt_tick(v)
        ));
        v += y_step;
    }
    // vertical grid + x tick labels every 4 hours
    for hour in (0..=24).step_by(4) {
        let x = x_of(hour as f64);
        s.push_str(&format!(
            "<line x1=\"{x:.1}\" y1=\"{:.1}\" x2=\"{x:.1}\" y2=\"{:.1}\" \
             stroke=\"#dddddd\" stroke-width=\"1\"/>\n",
            MARGIN_TOP,
            MARGIN_TOP + plot_h
        ));
        s.push_str(&format!(
            "<text x=\"{x:.1}\" y=\"{:.1}\" text-anchor=\"middle\">{hour}</text>\n",
            MARGIN_TOP + plot_h + 20.0
        ));
    }
    // axes
    s.push_str(&format!(
        "<line x1=\"{l:.1}\" y1=\"{t:.1}\" x2=\"{l:.1}\" y2=\"{b:.1}\" stroke=\"black\"/>\n\
         <line x1=\"{l:.1}\" y1=\"{b:.1}\" x2=\"{r:.1}\" y2=\"{b:.1}\" stroke=\"black\"/>\n",
        l = MARGIN_LEFT,
        t = MARGIN_TOP,
        b = MARGIN_TOP + plot_h,
        r = MARGIN_LEFT + plot_w
    ));
    // axis labels
    s.push_str(&format!(
        "<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"middle\">hour of day</text>\n",
        MARGIN_LEFT + plot_w / 2.0,
        HEIGHT - 14.0
    ));
    s.push_str(&format!(
        "<text x=\"18\" y=\"{:.1}\" text-anchor=\"middle\" \
         transform=\"rotate(-90 18 {:.1})\">expected demand (kW)</text>\n",
        MARGIN_TOP + plot_h / 2.0,
        MARGIN_TOP + plot_h / 2.0
    ));

    for (k, (label, p)) in profiles.iter().enumerate() {
        let color = PALETTE[k % PALETTE.len()];
        let mut points = String::with_capacity(12 * p.n_bins());
        for i in 0..p.n_bins() {
            let x = x_of(p.bin_center(i));
            let y = y_of(p.values_kw()[i]);
            points.push_str(&format!("{x:.2},{y:.2} "));
        }
        s.push_str(&format!(
            "<polyline fill=\"none\" stroke=\"{color}\" stroke-width=\"1.8\" \
             points=\"{}\"/>\n",
            points.trim_end()
        ));
        // legend entry
        let ly = MARGIN_TOP + 16.0 + 20.0 * k as f64;
        let lx = MARGIN_LEFT + plot_w - 190.0;
        s.push_str(&format!(
            "<line x1=\"{lx:.1}\" y1=\"{ly:.1}\" x2=\"{:.1}\" y2=\"{ly:.1}\" \
             stroke=\"{color}\" stroke-width=\"3\"/>\n",
            lx + 26.0
        ));
        s.push_str(&format!(
            "<text x=\"{:.1}\" y=\"{:.1}\">{}</text>\n",
            lx + 34.0,
            ly + 4.0,
            escape(label)
        ));
    }
    s.push_str("</svg>\n");
    Ok(s)
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::profile::{DemandProfile, ProfileMeta, Provenance};

    fn flat(value: f64) -> DemandProfile {
        DemandProfile::new(
            1.0,
            vec![value; 24],
            None,
            ProfileMeta::new(Provenance::Imported),
        )
        .unwrap()
    }

    #[test]
    fn single_profile_renders_one_polyline() {
        let p = flat(0.7);
        let svg = render_overlay("flat", &[("flat", &p)]).unwrap();
        assert_eq!(svg.matches("<polyline").count(), 1);
        assert!(svg.starts_with("<svg"));
        assert!(svg.trim_end().ends_with("</svg>"));
        assert!(svg.contains("hour of day"));
        assert!(svg.contains("expected demand (kW)"));
    }

    #[test]
    fn overlay_gets_a_polyline_and_legend_entry_each() {
        let a = flat(0.5);
        let b = flat(1.0);
        let svg = render_overlay("two", &[("first", &a), ("second", &b)]).unwrap();
        assert_eq!(svg.matches("<polyline").count(), 2);
        assert!(svg.contains(">first</text>"));
        assert!(svg.contains(">second</text>"));
        assert!(svg.contains("#1f77b4") && svg.contains("#d62728"));
    }

    #[test]
    fn empty_and_mismatched_inputs_error() {
        assert!(matches!(render_overlay("x", &[]), Err(SvgError::NoProfiles)));
        let a = flat(0.5);
        let b = DemandProfile::new(
            0.5,
            vec![0.1; 48],
            None,
            ProfileMeta::new(Provenance::Imported),
        )
        .unwrap();
        assert!(matches!(
            render_overlay("x", &[("a", &a), ("b", &b)]),
            Err(SvgError::GridMismatch(_))
        ));
    }

    #[test]
    fn labels_are_escaped() {
        let p = flat(0.2);
        let svg = render_overlay("a<b", &[("x&y", &p)]).unwrap();
        assert!(svg.contains("a&lt;b"));
        assert!(svg.contains("x&amp;y"));
        assert!(!svg.contains("a<b"));
    }

    #[test]
    fn flat_zero_profile_still_renders() {
        let p = flat(0.0);
        let svg = render_overlay("zero", &[("zero", &p)]).unwrap();
        assert!(svg.contains("<polyline"));
    }
}
