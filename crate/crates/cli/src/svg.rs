//! Plain SVG 1.1 figures: band rows per period and the IDS staircase.

use std::fmt::Write;

use dmspec::{Band, IdsTable, SpectrumApprox};

const WIDTH: f64 = 800.0;
const MARGIN: f64 = 60.0;
const ROW: f64 = 18.0;

fn header(height: f64) -> String {
    format!(
        "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n\
         <svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"{WIDTH}\" height=\"{height}\" \
         viewBox=\"0 0 {WIDTH} {height}\">\n\
         <rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
    )
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

struct Axis {
    lo: f64,
    hi: f64,
}

impl Axis {
    fn x(&self, e: f64) -> f64 {
        MARGIN + (e - self.lo) / (self.hi - self.lo) * (WIDTH - 2.0 * MARGIN)
    }

    fn ticks(&self, out: &mut String, y: f64) {
        for i in 0..=4 {
            let e = self.lo + (self.hi - self.lo) * i as f64 / 4.0;
            let x = self.x(e);
            let _ = writeln!(
                out,
                "<line x1=\"{x:.2}\" y1=\"{y:.2}\" x2=\"{x:.2}\" y2=\"{:.2}\" stroke=\"black\"/>\
                 <text x=\"{x:.2}\" y=\"{:.2}\" font-size=\"11\" text-anchor=\"middle\">{e:.3}</text>",
                y + 4.0,
                y + 16.0
            );
        }
    }
}

/// One row of intervals per entry, top to bottom.
pub fn band_rows(rows: &[(String, Vec<Band>)], title: &str) -> String {
    let (lo, hi) = rows
        .iter()
        .flat_map(|(_, b)| b.iter())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), band| (a.min(band.lo), b.max(band.hi)));
    let (lo, hi) = if lo < hi { (lo, hi) } else { (lo - 1.0, hi + 1.0) };
    let pad = 0.05 * (hi - lo);
    let axis = Axis {
        lo: lo - pad,
        hi: hi + pad,
    };
    let height = 40.0 + ROW * rows.len() as f64 + 40.0;
    let mut out = header(height);
    let _ = writeln!(
        out,
        "<text x=\"{:.1}\" y=\"20\" font-size=\"14\" text-anchor=\"middle\">{}</text>",
        WIDTH / 2.0,
        escape(title)
    );
    for (i, (label, bands)) in rows.iter().enumerate() {
        let y = 40.0 + ROW * i as f64;
        let _ = writeln!(
            out,
            "<text x=\"{:.1}\" y=\"{:.2}\" font-size=\"11\" text-anchor=\"end\">{}</text>",
            MARGIN - 6.0,
            y + ROW * 0.7,
            escape(label)
        );
        for b in bands {
            let x0 = axis.x(b.lo);
            let w = (axis.x(b.hi) - x0).max(0.5);
            let _ = writeln!(
                out,
                "<rect x=\"{x0:.2}\" y=\"{:.2}\" width=\"{w:.2}\" height=\"{:.2}\" fill=\"steelblue\"/>",
                y + 2.0,
                ROW - 4.0
            );
        }
    }
    axis.ticks(&mut out, 40.0 + ROW * rows.len() as f64 + 4.0);
    out.push_str("</svg>\n");
    out
}

/// `k(E)` as a polyline over shaded bands.
pub fn ids_staircase(table: &IdsTable, spectrum: &SpectrumApprox) -> String {
    let e = &table.energies;
    let (lo, hi) = (e[0], e[e.len() - 1]);
    let axis = Axis {
        lo,
        hi: if hi > lo { hi } else { lo + 1.0 },
    };
    let top = 30.0;
    let plot_h = 320.0;
    let height = top + plot_h + 40.0;
    let y = |k: f64| top + (1.0 - k) * plot_h;
    let mut out = header(height);
    for b in &spectrum.bands {
        let (a, c) = (b.lo.max(axis.lo), b.hi.min(axis.hi));
        if a > c {
            continue;
        }
        let x0 = axis.x(a);
        let _ = writeln!(
            out,
            "<rect x=\"{x0:.2}\" y=\"{top:.2}\" width=\"{:.2}\" height=\"{plot_h:.2}\" fill=\"#dde8f4\"/>",
            (axis.x(c) - x0).max(0.5)
        );
    }
    let _ = writeln!(
        out,
        "<rect x=\"{MARGIN}\" y=\"{top}\" width=\"{:.2}\" height=\"{plot_h}\" fill=\"none\" stroke=\"black\"/>",
        WIDTH - 2.0 * MARGIN
    );
    let mut points = String::new();
    let mut prev_k = 0.0;
    for (&en, &k) in e.iter().zip(&table.k_values) {
        let x = axis.x(en);
        let _ = write!(points, "{x:.2},{:.2} {x:.2},{:.2} ", y(prev_k), y(k));
        prev_k = k;
    }
    let _ = writeln!(
        out,
        "<polyline points=\"{}\" fill=\"none\" stroke=\"darkred\" stroke-width=\"1.5\"/>",
        points.trim_end()
    );
    for (k, label) in [(0.0, "0"), (0.5, "0.5"), (1.0, "1")] {
        let _ = writeln!(
            out,
            "<text x=\"{:.1}\" y=\"{:.2}\" font-size=\"11\" text-anchor=\"end\">{label}</text>",
            MARGIN - 6.0,
            y(k) + 4.0
        );
    }
    axis.ticks(&mut out, top + plot_h);
    out.push_str("</svg>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn band_rows_draw_every_band() {
        let rows = vec![
            ("p=1".to_string(), vec![Band { lo: 3.0, hi: 7.0 }]),
            (
                "p=2".to_string(),
                vec![Band { lo: -1.0, hi: 0.0 }, Band { lo: 5.0, hi: 6.0 }],
            ),
        ];
        let svg = band_rows(&rows, "a < b");
        assert!(svg.starts_with("<?xml"));
        assert!(svg.ends_with("</svg>\n"));
        assert_eq!(svg.matches("fill=\"steelblue\"").count(), 3);
        assert!(svg.contains("a &lt; b"));
    }

    #[test]
    fn staircase_has_one_vertex_pair_per_energy() {
        let table = IdsTable {
            energies: vec![-1.0, 0.0, 1.0],
            k_values: vec![0.0, 0.5, 1.0],
            truncation_size: 16,
            sample_count: 1,
            seed: 0,
        };
        let s = SpectrumApprox::from_bands(vec![Band { lo: -0.5, hi: 0.5 }], 1, 1e-9).unwrap();
        let svg = ids_staircase(&table, &s);
        let poly = svg.split("points=\"").nth(1).unwrap().split('"').next().unwrap();
        assert_eq!(poly.split(' ').count(), 6);
        assert!(svg.contains("#dde8f4"));
    }
}
