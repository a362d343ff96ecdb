//! Hand-rolled SVG plots: a position histogram for walk distributions and
//! a unit-circle scatter for spectra. No plotting dependency; coordinates
//! are rounded to fixed precision so output is deterministic.

use std::fmt::Write;

fn px(v: f64) -> String {
    format!("{v:.2}")
}

fn header(width: u32, height: u32, meta_comment: &str) -> String {
    format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{width}\" height=\"{height}\" \
         viewBox=\"0 0 {width} {height}\">\n<!--\n{meta_comment}-->\n\
         <rect width=\"{width}\" height=\"{height}\" fill=\"white\"/>\n"
    )
}

/// Bar chart of a position distribution (site, probability).
pub fn histogram(dist: &[(i64, f64)], title: &str, meta_comment: &str) -> String {
    let (width, height) = (820u32, 420u32);
    let (ml, mr, mt, mb) = (50.0, 20.0, 30.0, 40.0);
    let plot_w = width as f64 - ml - mr;
    let plot_h = height as f64 - mt - mb;
    let mut svg = header(width, height, meta_comment);
    let max_p = dist.iter().map(|&(_, p)| p).fold(0.0f64, f64::max).max(1e-300);
    let n = dist.len().max(1) as f64;
    let bar_w = (plot_w / n).max(0.5);
    writeln!(
        svg,
        "<text x=\"{}\" y=\"20\" font-family=\"monospace\" font-size=\"13\">{title}</text>",
        px(ml)
    )
    .unwrap();
    // frame and y-axis scale
    writeln!(
        svg,
        "<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"#444\"/>",
        px(ml),
        px(mt),
        px(plot_w),
        px(plot_h)
    )
    .unwrap();
    writeln!(
        svg,
        "<text x=\"4\" y=\"{}\" font-family=\"monospace\" font-size=\"11\">{max_p:.3}</text>",
        px(mt + 10.0)
    )
    .unwrap();
    for (i, &(x, p)) in dist.iter().enumerate() {
        let h = plot_h * p / max_p;
        let x0 = ml + i as f64 * bar_w;
        writeln!(
            svg,
            "<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"#3465a4\"/>",
            px(x0),
            px(mt + plot_h - h),
            px(bar_w.max(1.0) - 0.2),
            px(h)
        )
        .unwrap();
        // sparse x labels
        if x % 20 == 0 {
            writeln!(
                svg,
                "<text x=\"{}\" y=\"{}\" font-family=\"monospace\" font-size=\"11\" text-anchor=\"middle\">{x}</text>",
                px(x0 + bar_w / 2.0),
                px(mt + plot_h + 16.0)
            )
            .unwrap();
        }
    }
    svg.push_str("</svg>\n");
    svg
}

fn label_color(label: &str) -> &'static str {
    match label {
        "band_localized_embedded" => "#cc0000",
        "gap_discrete" => "#204a87",
        "near_threshold" => "#f57900",
        "non_unimodular" => "#000000",
        _ => "#999999",
    }
}

/// Eigenvalues on the unit circle, colored by spectral label, with the
/// essential-spectrum arcs drawn as a thick underlay.
pub fn spectrum_scatter(
    points: &[(f64, f64, String)],
    arcs: &[(f64, f64)],
    meta_comment: &str,
) -> String {
    let size = 520u32;
    let c = size as f64 / 2.0;
    let r = c - 40.0;
    let mut svg = header(size, size, meta_comment);
    writeln!(
        svg,
        "<circle cx=\"{}\" cy=\"{}\" r=\"{}\" fill=\"none\" stroke=\"#cccccc\"/>",
        px(c),
        px(c),
        px(r)
    )
    .unwrap();
    // arcs as dense polylines: no sweep-flag bookkeeping to get wrong
    for &(lo, hi) in arcs {
        let mut path = String::from("M");
        let steps = 120;
        for k in 0..=steps {
            let t = lo + (hi - lo) * k as f64 / steps as f64;
            let (x, y) = (c + r * t.cos(), c - r * t.sin());
            write!(path, " {},{}", px(x), px(y)).unwrap();
            if k == 0 {
                path.push_str(" L");
            }
        }
        writeln!(
            svg,
            "<path d=\"{path}\" fill=\"none\" stroke=\"#a8c0a8\" stroke-width=\"7\" stroke-linecap=\"round\"/>"
        )
        .unwrap();
    }
    for (re, im, label) in points {
        writeln!(
            svg,
            "<circle cx=\"{}\" cy=\"{}\" r=\"3\" fill=\"{}\"><title>{label}</title></circle>",
            px(c + r * re),
            px(c - r * im),
            label_color(label)
        )
        .unwrap();
    }
    svg.push_str("</svg>\n");
    svg
}
