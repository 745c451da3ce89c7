//! SVG fault-space diagrams: time on the X axis, memory bits on the Y axis.

use std::collections::BTreeMap;
use std::fmt::Write;

use crate::campaign::CampaignResult;
use crate::config::Configuration;
use crate::error::Result;
use crate::interp::CellClass;
use crate::predict::{classify, exclusion};

/// Colour class of a fault-space region.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Fill {
    Sdc,
    Benign,
    Trap,
    Timeout,
    /// Detected by exactly one enabled assertion.
    DetectedOne,
    /// Detected by two or more enabled assertions.
    DetectedMany,
}

impl Fill {
    pub fn color(self) -> &'static str {
        match self {
            Fill::Sdc => "#808080",
            Fill::Benign => "#ffffff",
            Fill::Trap => "#e6c229",
            Fill::Timeout => "#e07a2f",
            Fill::DetectedOne => "#1a7a1a",
            Fill::DetectedMany => "#8fd18f",
        }
    }

    /// Value of the `class` attribute on region rectangles.
    pub fn css_class(self) -> &'static str {
        match self {
            Fill::Sdc => "sdc",
            Fill::Benign => "benign",
            Fill::Trap => "trap",
            Fill::Timeout => "timeout",
            Fill::DetectedOne => "detected-one",
            Fill::DetectedMany => "detected-many",
        }
    }

    fn label(self) -> &'static str {
        match self {
            Fill::Sdc => "SDC",
            Fill::Benign => "benign",
            Fill::Trap => "trap",
            Fill::Timeout => "timeout",
            Fill::DetectedOne => "detected (1 assertion)",
            Fill::DetectedMany => "detected (2+ assertions)",
        }
    }

    const ALL: [Fill; 6] = [Fill::Sdc, Fill::DetectedOne, Fill::DetectedMany, Fill::Benign, Fill::Trap, Fill::Timeout];
}

/// A homogeneous region in cell units on the compressed timeline.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct Region {
    pub bit_lo: u64,
    pub bit_hi: u64,
    pub t_lo: u64,
    pub t_hi: u64,
    pub fill: Fill,
}

impl Region {
    pub fn cells(&self) -> u64 {
        (self.bit_hi - self.bit_lo) * (self.t_hi - self.t_lo)
    }
}

const PLOT_WIDTH: f64 = 800.0;
const PLOT_HEIGHT_TARGET: f64 = 480.0;
const GUTTER: f64 = 110.0;
const TOP: f64 = 36.0;

/// Maximal regions for configuration `c`: one per run of equally classified
/// cells in a bit row, merged across adjacent bits of the same variable.
pub fn regions(campaign: &CampaignResult, c: &Configuration) -> Result<Vec<Region>> {
    c.ensure_len(campaign.n_assertions())?;
    let excluded = exclusion(campaign, c);
    let compress = |t: u64| t - excluded.covered_below(t);

    let mut rows: BTreeMap<u64, Vec<(u64, u64, Fill)>> = BTreeMap::new();
    for r in &campaign.records {
        let (lo, hi) = (compress(r.lo), compress(r.hi));
        if lo == hi {
            continue;
        }
        let fill = match classify(r, c) {
            CellClass::Detected => {
                let enabled = r.detectors.iter().filter(|d| c.is_enabled(d.assertion)).count();
                if enabled >= 2 {
                    Fill::DetectedMany
                } else {
                    Fill::DetectedOne
                }
            }
            CellClass::Sdc => Fill::Sdc,
            CellClass::Benign => Fill::Benign,
            CellClass::Trap => Fill::Trap,
            CellClass::Timeout => Fill::Timeout,
        };
        let row = rows.entry(r.bit).or_default();
        match row.last_mut() {
            Some(last) if last.1 == lo && last.2 == fill => last.1 = hi,
            _ => row.push((lo, hi, fill)),
        }
    }

    let group_of = |bit: u64| campaign.variables.iter().position(|v| bit >= v.offset && bit < v.offset + v.bits());
    let mut open: BTreeMap<(u64, u64, Fill), u64> = BTreeMap::new();
    let mut out = Vec::new();
    let mut prev: Option<(u64, Option<usize>)> = None;
    for (&bit, row) in &rows {
        let contiguous = matches!(prev, Some((b, g)) if b + 1 == bit && g == group_of(bit));
        let keys: Vec<(u64, u64, Fill)> = row.clone();
        let end = prev.map_or(bit, |(b, _)| b + 1);
        open.retain(|k, start| {
            let keep = contiguous && keys.contains(k);
            if !keep {
                out.push(Region { bit_lo: *start, bit_hi: end, t_lo: k.0, t_hi: k.1, fill: k.2 });
            }
            keep
        });
        for k in keys {
            open.entry(k).or_insert(bit);
        }
        prev = Some((bit, group_of(bit)));
    }
    if let Some((b, _)) = prev {
        for (k, start) in open {
            out.push(Region { bit_lo: start, bit_hi: b + 1, t_lo: k.0, t_hi: k.1, fill: k.2 });
        }
    }
    out.sort_by_key(|r| (r.bit_lo, r.t_lo, r.bit_hi));
    Ok(out)
}

fn fmt_num(x: f64) -> String {
    let s = format!("{x:.4}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s.is_empty() {
        "0".into()
    } else {
        s.into()
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

/// Fault-space diagram of the variant compiled with `c`. Region geometry
/// is emitted in cell units inside a scaled group, so `width × height` of
/// each region rectangle is its cell count.
pub fn render_svg(campaign: &CampaignResult, c: &Configuration) -> Result<String> {
    let regions = regions(campaign, c)?;
    let excluded = exclusion(campaign, c);
    let runtime = campaign.total_steps - excluded.total();
    let bits = campaign.total_bits;

    let sx = if runtime == 0 { 1.0 } else { PLOT_WIDTH / runtime as f64 };
    let sy = if bits == 0 { 1.0 } else { (PLOT_HEIGHT_TARGET / bits as f64).clamp(2.0, 14.0) };
    let plot_h = bits as f64 * sy;
    let axis_y = TOP + plot_h + 8.0;
    let legend_y = axis_y + 16.0 * (campaign.n_assertions().max(1) as f64) + 28.0;
    let width = GUTTER + PLOT_WIDTH + 20.0;
    let height = legend_y + 24.0;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{}" height="{}" viewBox="0 0 {} {}" font-family="sans-serif" font-size="11">"#,
        fmt_num(width),
        fmt_num(height),
        fmt_num(width),
        fmt_num(height)
    );
    let _ = writeln!(s, "<title>config {} program {}</title>", c, escape(&campaign.program_digest));
    let _ = writeln!(
        s,
        r#"<text x="{}" y="20">config {} | runtime {} | {} bits</text>"#,
        fmt_num(GUTTER),
        c,
        runtime,
        bits
    );

    let _ = writeln!(
        s,
        r#"<g id="plot" transform="translate({},{}) scale({},{})" shape-rendering="crispEdges">"#,
        fmt_num(GUTTER),
        fmt_num(TOP),
        fmt_num(sx),
        fmt_num(sy)
    );
    for r in &regions {
        let _ = writeln!(
            s,
            r#"<rect class="{}" x="{}" y="{}" width="{}" height="{}" fill="{}"/>"#,
            r.fill.css_class(),
            r.t_lo,
            r.bit_lo,
            r.t_hi - r.t_lo,
            r.bit_hi - r.bit_lo,
            r.fill.color()
        );
    }
    let _ = writeln!(s, "</g>");

    let _ = writeln!(s, r#"<g id="gutters">"#);
    for v in &campaign.variables {
        let y0 = TOP + v.offset as f64 * sy;
        let y1 = TOP + (v.offset + v.bits()) as f64 * sy;
        let _ = writeln!(
            s,
            r##"<line x1="{}" y1="{}" x2="{}" y2="{}" stroke="#333333" stroke-width="0.5"/>"##,
            fmt_num(GUTTER - 100.0),
            fmt_num(y0),
            fmt_num(GUTTER + PLOT_WIDTH),
            fmt_num(y0)
        );
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" text-anchor="end" dominant-baseline="middle">{}</text>"#,
            fmt_num(GUTTER - 6.0),
            fmt_num((y0 + y1) / 2.0),
            escape(&v.name)
        );
    }
    let _ = writeln!(
        s,
        r##"<rect x="{}" y="{}" width="{}" height="{}" fill="none" stroke="#333333" stroke-width="1"/>"##,
        fmt_num(GUTTER),
        fmt_num(TOP),
        fmt_num(PLOT_WIDTH),
        fmt_num(plot_h)
    );
    let _ = writeln!(s, "</g>");

    let _ = writeln!(s, r#"<g id="windows">"#);
    for (row, a) in campaign.assertions.iter().enumerate().filter(|(_, a)| c.is_enabled(a.index)) {
        let y = axis_y + 16.0 * row as f64;
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" text-anchor="end">{}</text>"#,
            fmt_num(GUTTER - 6.0),
            fmt_num(y + 9.0),
            escape(&a.id)
        );
        for &(start, end) in &a.windows {
            let (x0, x1) = (start - excluded.covered_below(start), end - excluded.covered_below(end));
            let _ = writeln!(
                s,
                r##"<rect class="window" data-assertion="{}" x="{}" y="{}" width="{}" height="10" fill="#3366cc"/>"##,
                a.index,
                fmt_num(GUTTER + x0 as f64 * sx),
                fmt_num(y),
                fmt_num((x1 - x0) as f64 * sx)
            );
        }
    }
    let _ = writeln!(s, "</g>");

    let _ = writeln!(s, r#"<g id="legend">"#);
    for (i, f) in Fill::ALL.iter().enumerate() {
        let x = GUTTER + 135.0 * i as f64;
        let _ = writeln!(
            s,
            r##"<rect x="{}" y="{}" width="10" height="10" fill="{}" stroke="#333333" stroke-width="0.5"/><text x="{}" y="{}">{}</text>"##,
            fmt_num(x),
            fmt_num(legend_y),
            f.color(),
            fmt_num(x + 14.0),
            fmt_num(legend_y + 9.0),
            f.label()
        );
    }
    let _ = writeln!(s, "</g>");
    s.push_str("</svg>\n");
    Ok(s)
}
