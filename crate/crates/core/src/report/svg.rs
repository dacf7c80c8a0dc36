//! Deterministic wordcloud layout and SVG output.
//!
//! Words are placed largest first on a square spiral over an integer grid
//! centred at the origin; each word takes the first grid point where its
//! estimated bounding box clears every word already placed. Font size is
//! `12 + 60 * w / w_max` with weights floored at 0.01, so the heaviest word is
//! 72pt and a weight of zero would sit at 12pt. Only exact IEEE operations are
//! used, so the same entries always produce the same bytes.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::insights::WordcloudEntry;

pub const MIN_FONT: f64 = 12.0;
pub const MAX_FONT: f64 = 72.0;
pub const WEIGHT_FLOOR: f64 = 0.01;

const GRID_STEP: i64 = 4;
const CHAR_WIDTH_EM: f64 = 0.6;
const LINE_HEIGHT_EM: f64 = 1.2;
const PADDING: f64 = 2.0;
const MARGIN: f64 = 10.0;
const MAX_RING: i64 = 4096;

/// Colors indexed by cluster id, cycling.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Palette {
    pub colors: Vec<String>,
}

impl Default for Palette {
    fn default() -> Self {
        let colors = [
            "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22",
            "#17becf",
        ];
        Palette {
            colors: colors.iter().map(|c| c.to_string()).collect(),
        }
    }
}

impl Palette {
    pub fn color(&self, cluster_id: usize) -> &str {
        &self.colors[cluster_id % self.colors.len()]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlacedWord {
    pub token: String,
    pub cluster_id: usize,
    pub font_size: f64,
    /// Centre of the bounding box.
    pub x: f64,
    pub y: f64,
    pub width: f64,
    pub height: f64,
}

impl PlacedWord {
    /// `(left, top, right, bottom)`.
    pub fn bounds(&self) -> (f64, f64, f64, f64) {
        let (hw, hh) = (self.width / 2.0, self.height / 2.0);
        (self.x - hw, self.y - hh, self.x + hw, self.y + hh)
    }

    pub fn overlaps(&self, other: &PlacedWord) -> bool {
        let (l1, t1, r1, b1) = self.bounds();
        let (l2, t2, r2, b2) = other.bounds();
        l1 < r2 && l2 < r1 && t1 < b2 && t2 < b1
    }
}

pub fn font_size(weight: f64, max_weight: f64) -> f64 {
    let w = weight.max(WEIGHT_FLOOR);
    let max = max_weight.max(WEIGHT_FLOOR);
    MIN_FONT + (MAX_FONT - MIN_FONT) * (w / max)
}

/// Square spiral over grid offsets: (0,0), (1,0), (1,1), (0,1), (-1,1), ...
fn spiral() -> impl Iterator<Item = (i64, i64)> {
    std::iter::once((0, 0)).chain((1..=MAX_RING).flat_map(|ring| {
        let right = (-ring + 1..=ring).map(move |y| (ring, y));
        let top = (-ring..ring).rev().map(move |x| (x, ring));
        let left = (-ring..ring).rev().map(move |y| (-ring, y));
        let bottom = (-ring + 1..=ring).map(move |x| (x, -ring));
        right.chain(top).chain(left).chain(bottom)
    }))
}

pub fn layout_wordcloud(entries: &[WordcloudEntry]) -> Result<Vec<PlacedWord>> {
    if entries.is_empty() {
        return Err(Error::EmptyWordcloud);
    }
    let max_weight = entries
        .iter()
        .map(|e| e.weight.max(WEIGHT_FLOOR))
        .fold(WEIGHT_FLOOR, f64::max);
    let mut order: Vec<&WordcloudEntry> = entries.iter().collect();
    order.sort_by(|a, b| b.weight.max(WEIGHT_FLOOR).total_cmp(&a.weight.max(WEIGHT_FLOOR)));

    let mut placed: Vec<PlacedWord> = Vec::with_capacity(entries.len());
    for entry in order {
        let size = font_size(entry.weight, max_weight);
        let chars = entry.token.chars().count().max(1) as f64;
        let mut word = PlacedWord {
            token: entry.token.clone(),
            cluster_id: entry.cluster_id,
            font_size: size,
            x: 0.0,
            y: 0.0,
            width: CHAR_WIDTH_EM * size * chars + 2.0 * PADDING,
            height: LINE_HEIGHT_EM * size + 2.0 * PADDING,
        };
        let spot = spiral().find(|&(gx, gy)| {
            word.x = (gx * GRID_STEP) as f64;
            word.y = (gy * GRID_STEP) as f64;
            placed.iter().all(|p| !word.overlaps(p))
        });
        if spot.is_none() {
            return Err(Error::InvalidConfig(format!(
                "could not place {:?} in the wordcloud",
                entry.token
            )));
        }
        placed.push(word);
    }
    Ok(placed)
}

fn escape(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for c in text.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            c => out.push(c),
        }
    }
    out
}

pub fn render_wordcloud_svg(entries: &[WordcloudEntry], palette: &Palette) -> Result<String> {
    let words = layout_wordcloud(entries)?;
    let (mut left, mut top, mut right, mut bottom) = words[0].bounds();
    for w in &words[1..] {
        let (l, t, r, b) = w.bounds();
        left = left.min(l);
        top = top.min(t);
        right = right.max(r);
        bottom = bottom.max(b);
    }
    let (vx, vy) = (left - MARGIN, top - MARGIN);
    let (vw, vh) = (right - left + 2.0 * MARGIN, bottom - top + 2.0 * MARGIN);

    let mut svg = String::new();
    svg.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    let _ = writeln!(
        svg,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"{vw:.2}\" height=\"{vh:.2}\" viewBox=\"{vx:.2} {vy:.2} {vw:.2} {vh:.2}\">"
    );
    let _ = writeln!(
        svg,
        "<rect x=\"{vx:.2}\" y=\"{vy:.2}\" width=\"{vw:.2}\" height=\"{vh:.2}\" fill=\"#ffffff\"/>"
    );
    for w in &words {
        let _ = writeln!(
            svg,
            "<text x=\"{:.2}\" y=\"{:.2}\" font-size=\"{:.2}\" font-family=\"sans-serif\" text-anchor=\"middle\" dominant-baseline=\"central\" fill=\"{}\" data-cluster=\"{}\">{}</text>",
            w.x,
            w.y,
            w.font_size,
            palette.color(w.cluster_id),
            w.cluster_id,
            escape(&w.token)
        );
    }
    svg.push_str("</svg>\n");
    Ok(svg)
}
