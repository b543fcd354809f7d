// Two-panel figure: Ω_t on the left, w_t against a on the right.

use std::fmt::Write;

use brownmeasure::brown::{fmt_g, BrownProfile};

const W: f64 = 460.0;
const H: f64 = 360.0;
const PAD: f64 = 48.0;

struct Frame {
    x0: f64,
    lo: (f64, f64),
    hi: (f64, f64),
}

impl Frame {
    fn px(&self, x: f64, y: f64) -> (f64, f64) {
        let sx = (x - self.lo.0) / (self.hi.0 - self.lo.0);
        let sy = (y - self.lo.1) / (self.hi.1 - self.lo.1);
        (self.x0 + PAD + sx * (W - 2.0 * PAD), H - PAD - sy * (H - 2.0 * PAD))
    }

    fn axes(&self, out: &mut String, xlabel: &str, ylabel: &str) {
        let (l, b) = self.px(self.lo.0, self.lo.1);
        let (r, t) = self.px(self.hi.0, self.hi.1);
        let _ = writeln!(
            out,
            r#"<rect x="{l:.2}" y="{t:.2}" width="{:.2}" height="{:.2}" fill="none" stroke="black"/>"#,
            r - l,
            b - t
        );
        for (v, anchor, x, y) in [
            (self.lo.0, "start", l, b + 16.0),
            (self.hi.0, "end", r, b + 16.0),
        ] {
            let _ = writeln!(out, r#"<text x="{x:.2}" y="{y:.2}" font-size="11" text-anchor="{anchor}">{}</text>"#, fmt_g(v, 4));
        }
        for (v, y) in [(self.lo.1, b), (self.hi.1, t + 10.0)] {
            let _ = writeln!(out, r#"<text x="{:.2}" y="{y:.2}" font-size="11" text-anchor="end">{}</text>"#, l - 4.0, fmt_g(v, 4));
        }
        let _ = writeln!(out, r#"<text x="{:.2}" y="{:.2}" font-size="12" text-anchor="middle">{xlabel}</text>"#, 0.5 * (l + r), b + 32.0);
        let _ = writeln!(out, r#"<text x="{:.2}" y="{:.2}" font-size="12" text-anchor="middle">{ylabel}</text>"#, 0.5 * (l + r), t - 8.0);
    }

    fn polyline(&self, out: &mut String, pts: &[(f64, f64)], colour: &str) {
        let mut s = String::new();
        for &(x, y) in pts {
            let (px, py) = self.px(x, y);
            let _ = write!(s, "{px:.2},{py:.2} ");
        }
        let _ = writeln!(out, r#"<polyline points="{}" fill="none" stroke="{colour}" stroke-width="1.5"/>"#, s.trim_end());
    }
}

pub fn figure(profile: &BrownProfile, t: f64, digest: &str) -> String {
    let lo = profile.omega_intervals.first().map_or(-1.0, |i| i.0);
    let hi = profile.omega_intervals.last().map_or(1.0, |i| i.1);
    let span = (hi - lo).max(1e-9);
    let (xlo, xhi) = (lo - 0.05 * span, hi + 0.05 * span);
    let bmax = profile.b.iter().cloned().fold(0.0, f64::max).max(1e-9);
    let wmax = profile.w.iter().cloned().fold(0.0, f64::max).max(1e-9);

    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{}" height="{}" viewBox="0 0 {} {}">"#,
        2.0 * W,
        H + 24.0,
        2.0 * W,
        H + 24.0
    );
    let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);

    let left = Frame { x0: 0.0, lo: (xlo, -1.1 * bmax), hi: (xhi, 1.1 * bmax) };
    left.axes(&mut out, "a", "domain Ω_t");
    let right = Frame { x0: W, lo: (xlo, 0.0), hi: (xhi, 1.1 * wmax) };
    right.axes(&mut out, "a", "density w_t(a)");

    for (k, &(ilo, ihi)) in profile.omega_intervals.iter().enumerate() {
        let idx: Vec<usize> = (0..profile.len()).filter(|&i| profile.segment[i] == k).collect();
        // Closed boundary curve: top from left to right, bottom back.
        let mut curve = vec![(ilo, 0.0)];
        curve.extend(idx.iter().map(|&i| (profile.a[i], profile.b[i])));
        curve.push((ihi, 0.0));
        curve.extend(idx.iter().rev().map(|&i| (profile.a[i], -profile.b[i])));
        curve.push((ilo, 0.0));
        left.polyline(&mut out, &curve, "steelblue");
        let dens: Vec<(f64, f64)> = idx.iter().map(|&i| (profile.a[i], profile.w[i])).collect();
        right.polyline(&mut out, &dens, "firebrick");
    }
    let _ = writeln!(
        out,
        r#"<text x="{}" y="{}" font-size="11" text-anchor="middle">t = {}   measure sha256 {}</text>"#,
        W,
        H + 14.0,
        fmt_g(t, 6),
        &digest[..digest.len().min(16)]
    );
    out.push_str("</svg>\n");
    out
}
