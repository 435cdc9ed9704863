//! WebAssembly bindings for the browser demo: canonical forms of program
//! outputs, an SVG drawing of their diagrams, and equivalence checks.
//!
//! The plain functions return `hedcheck` errors and are what the tests
//! exercise; the exported wrappers turn errors into JavaScript exceptions.

use std::collections::{HashMap, HashSet, VecDeque};
use std::fmt::Write;

use hedcheck::dfl::{sym_sim_source, SymSimConfig};
use hedcheck::hed::NodeId;
use hedcheck::modular::{reduce_mod, RingConfig};
use hedcheck::pipeline::expand;
use hedcheck::sec::{sec_piped, SecConfig, SegmentLimit};
use hedcheck::{HedRef, Manager, Result};
use wasm_bindgen::prelude::*;

/// Node budget per segment when the page sets none.
pub const DEFAULT_MAX_NODES: usize = 1_000_000;

fn ring(width: Option<u32>) -> Result<Option<RingConfig>> {
    width.map(RingConfig::new).transpose()
}

/// Outputs of `src` as canonical diagrams, reduced modulo `2^width` when set.
fn outputs(m: &mut Manager, src: &str, width: Option<u32>) -> Result<Vec<(String, HedRef)>> {
    let list = sym_sim_source(src, &SymSimConfig::default())?;
    let ring = ring(width)?;
    let mut out = Vec::new();
    for (name, value) in expand(m, &list)? {
        let value = match &ring {
            Some(r) => reduce_mod(m, &value, r)?,
            None => value,
        };
        out.push((name, value));
    }
    Ok(out)
}

/// One `name = polynomial` line per output.
pub fn canonical_forms(src: &str, width: Option<u32>) -> Result<String> {
    let mut m = Manager::new();
    let mut text = String::new();
    for (name, value) in outputs(&mut m, src, width)? {
        writeln!(text, "{name} = {}", m.format(&value)?).unwrap();
    }
    Ok(text)
}

/// SVG drawing of the diagrams of every output of `src`, sharing nodes.
pub fn diagram_svg(src: &str, width: Option<u32>) -> Result<String> {
    let mut m = Manager::new();
    let roots = outputs(&mut m, src, width)?;
    Ok(render(&m, &roots))
}

/// JSON report of checking `imp` against `spec`.
pub fn check_json(spec: &str, imp: &str, width: Option<u32>, max_nodes: Option<usize>) -> Result<String> {
    let cfg = SymSimConfig::default();
    let spec = sym_sim_source(spec, &cfg)?;
    let imp = sym_sim_source(imp, &cfg)?;
    let cfg = SecConfig {
        ring: ring(width)?,
        limit: SegmentLimit::Nodes(max_nodes.unwrap_or(DEFAULT_MAX_NODES).max(1)),
        ..SecConfig::default()
    };
    Ok(sec_piped(&spec, &imp, &cfg)?.to_json())
}

const NODE_R: f64 = 18.0;
const ROW: f64 = 90.0;
const COL: f64 = 70.0;

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

/// Edge label: the weight, omitted when it is one.
fn weight_label(r: &HedRef) -> Option<String> {
    let w = r.weight().to_string();
    (w != "1").then_some(w)
}

/// Nodes by level: root labels on top, then variables from the top of the
/// order down, terminals at the bottom. Constant edges are dashed, linear
/// edges solid.
fn render(m: &Manager, roots: &[(String, HedRef)]) -> String {
    // Discover nodes breadth first so siblings sit near each other.
    let mut order: Vec<NodeId> = Vec::new();
    let mut seen: HashSet<NodeId> = HashSet::new();
    let mut queue: VecDeque<NodeId> = roots.iter().map(|(_, r)| r.node()).collect();
    while let Some(id) = queue.pop_front() {
        if !seen.insert(id) {
            continue;
        }
        order.push(id);
        if let Some((_, lo, hi)) = m.children(id) {
            queue.push_back(lo.node());
            queue.push_back(hi.node());
        }
    }
    // Level 0 holds the root labels; variables follow by descending index.
    let mut var_levels: Vec<u32> = order.iter().filter_map(|&id| m.children(id).map(|(v, ..)| v.index())).collect();
    var_levels.sort_unstable_by(|a, b| b.cmp(a));
    var_levels.dedup();
    let level = |id: NodeId| match m.children(id) {
        Some((v, ..)) => 1 + var_levels.iter().position(|&l| l == v.index()).unwrap(),
        None => 1 + var_levels.len(),
    };
    let mut rows: Vec<Vec<NodeId>> = vec![Vec::new(); var_levels.len() + 2];
    for &id in &order {
        rows[level(id)].push(id);
    }
    let widest = rows.iter().map(Vec::len).max().unwrap_or(0).max(roots.len()).max(1);
    let width = COL * (widest as f64 + 1.0);
    let height = ROW * (rows.len() as f64) + NODE_R;
    let x_of = |k: usize, n: usize| width * (k as f64 + 1.0) / (n as f64 + 1.0);
    let mut pos: HashMap<NodeId, (f64, f64)> = HashMap::new();
    for (l, row) in rows.iter().enumerate() {
        for (k, id) in row.iter().enumerate() {
            pos.insert(*id, (x_of(k, row.len()), NODE_R + 20.0 + ROW * l as f64));
        }
    }

    let mut svg = String::new();
    writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width:.0}" height="{height:.0}" viewBox="0 0 {width:.0} {height:.0}" font-family="sans-serif" font-size="13">"#
    )
    .unwrap();
    svg.push_str(
        r#"<defs><marker id="arrow" viewBox="0 0 10 10" refX="10" refY="5" markerWidth="7" markerHeight="7" orient="auto-start-reverse"><path d="M0,0 L10,5 L0,10 z"/></marker></defs>"#,
    );
    svg.push('\n');
    let edge = |svg: &mut String, from: (f64, f64), to: (f64, f64), dashed: bool, label: Option<String>| {
        let (dx, dy) = (to.0 - from.0, to.1 - from.1);
        let len = (dx * dx + dy * dy).sqrt().max(1.0);
        let (ux, uy) = (dx / len, dy / len);
        let (x1, y1, x2, y2) = (from.0, from.1 + NODE_R * 0.2, to.0 - ux * NODE_R, to.1 - uy * NODE_R);
        let dash = if dashed { r#" stroke-dasharray="5,4""# } else { "" };
        writeln!(
            svg,
            r#"<line x1="{x1:.1}" y1="{y1:.1}" x2="{x2:.1}" y2="{y2:.1}" stroke="black"{dash} marker-end="url(#arrow)"/>"#
        )
        .unwrap();
        if let Some(l) = label {
            let (mx, my) = ((x1 + x2) / 2.0, (y1 + y2) / 2.0);
            writeln!(svg, r##"<text x="{:.1}" y="{my:.1}" fill="#b03000">{}</text>"##, mx + 4.0, escape(&l)).unwrap();
        }
    };
    for (k, (name, r)) in roots.iter().enumerate() {
        let at = (x_of(k, roots.len()), 18.0);
        writeln!(
            svg,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="middle" font-weight="bold">{}</text>"#,
            at.0,
            at.1,
            escape(name)
        )
        .unwrap();
        edge(&mut svg, (at.0, at.1 + 4.0), pos[&r.node()], false, weight_label(r));
    }
    for &id in &order {
        if let Some((_, lo, hi)) = m.children(id) {
            let from = pos[&id];
            edge(&mut svg, from, pos[&lo.node()], true, weight_label(&lo));
            edge(&mut svg, from, pos[&hi.node()], false, weight_label(&hi));
        }
    }
    for &id in &order {
        let (x, y) = pos[&id];
        match m.children(id) {
            Some((v, ..)) => writeln!(
                svg,
                r#"<circle cx="{x:.1}" cy="{y:.1}" r="{NODE_R}" fill="white" stroke="black"/><text x="{x:.1}" y="{:.1}" text-anchor="middle">{}</text>"#,
                y + 4.5,
                escape(m.var_name(v))
            )
            .unwrap(),
            None => writeln!(
                svg,
                r#"<rect x="{:.1}" y="{:.1}" width="{}" height="{}" fill="white" stroke="black"/><text x="{x:.1}" y="{:.1}" text-anchor="middle">{}</text>"#,
                x - NODE_R,
                y - NODE_R,
                2.0 * NODE_R,
                2.0 * NODE_R,
                y + 4.5,
                if id == NodeId::ONE { "1" } else { "0" }
            )
            .unwrap(),
        }
    }
    svg.push_str("</svg>\n");
    svg
}

fn js(e: hedcheck::Error) -> JsError {
    JsError::new(&e.to_string())
}

/// Canonical polynomial of every output of `src`.
#[wasm_bindgen]
pub fn canonicalize(src: &str, width: Option<u32>) -> Result<String, JsError> {
    canonical_forms(src, width).map_err(js)
}

/// SVG drawing of the output diagrams of `src`.
#[wasm_bindgen]
pub fn hed_svg(src: &str, width: Option<u32>) -> Result<String, JsError> {
    diagram_svg(src, width).map_err(js)
}

/// JSON report of checking `imp` against `spec`.
#[wasm_bindgen]
pub fn check_programs(spec: &str, imp: &str, width: Option<u32>, max_nodes: Option<u32>) -> Result<String, JsError> {
    check_json(spec, imp, width, max_nodes.map(|n| n as usize)).map_err(js)
}
