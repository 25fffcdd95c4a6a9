//! Browser bindings: classify a matrix, locate a point of the stability
//! diagram, and draw the diagram for a set of points.

use orbitlab::catalogue::SCHEMA_VERSION;
use orbitlab::plot::{to_svg, PlotSample};
use orbitlab::report::{chi_contribution, classify_matrix, matrix_from_rows};
use orbitlab::symplectic::{
    classify_region, multipliers_from_point, GitPoint, Region, Sign, DEFAULT_BOUNDARY_TOL, DEFAULT_SYMPLECTIC_TOL,
};
use serde::{Deserialize, Serialize};
use wasm_bindgen::prelude::*;

#[derive(Deserialize)]
#[serde(untagged)]
enum MatrixInput {
    Wrapped { matrix: Vec<Vec<f64>> },
    Bare(Vec<Vec<f64>>),
}

/// JSON report for a monodromy given as `{"matrix": rows}` or bare rows.
pub fn classify_matrix_json(text: &str, unreduced: bool) -> Result<String, String> {
    let rows = match serde_json::from_str(text).map_err(|e| e.to_string())? {
        MatrixInput::Wrapped { matrix } | MatrixInput::Bare(matrix) => matrix,
    };
    let m = matrix_from_rows(&rows).map_err(|e| e.to_string())?;
    let report = classify_matrix(m, DEFAULT_SYMPLECTIC_TOL, unreduced).map_err(|e| e.to_string())?;
    serde_json::to_string_pretty(&report).map_err(|e| e.to_string())
}

#[derive(Serialize)]
struct PointReport {
    schema_version: u32,
    p: GitPoint,
    region: Region,
    /// Eigenvalues of the reduced `A`, as `[re, im]`.
    a_eigenvalues: [[f64; 2]; 2],
    multipliers: Vec<[f64; 2]>,
    chi_sft: Option<i64>,
}

/// Region and multipliers of `p = (tr A, det A)`.
pub fn locate_point_json(x: f64, y: f64) -> Result<String, String> {
    let p = GitPoint::new(x, y);
    let region = classify_region(p, 2, DEFAULT_BOUNDARY_TOL)
        .map_err(|e| e.to_string())?
        .region;
    let report = PointReport {
        schema_version: SCHEMA_VERSION,
        p,
        region,
        a_eigenvalues: p.a_eigenvalues().map(|z| [z.re, z.im]),
        multipliers: multipliers_from_point(p).iter().map(|z| [z.re, z.im]).collect(),
        chi_sft: chi_contribution(region),
    };
    serde_json::to_string_pretty(&report).map_err(|e| e.to_string())
}

#[derive(Deserialize)]
struct DiagramPoint {
    x: f64,
    y: f64,
    /// Signs at each symmetric point, as strings like "+-".
    #[serde(default)]
    signs: Vec<String>,
}

fn parse_signs(s: &str) -> Result<Vec<Sign>, String> {
    s.chars()
        .map(|c| match c {
            '+' => Ok(Sign::Plus),
            '-' => Ok(Sign::Minus),
            other => Err(format!("sign must be + or -, got '{other}'")),
        })
        .collect()
}

/// SVG of the diagram for `[{"x": .., "y": .., "signs": ["++", "-+"]}, ..]`.
/// Points are drawn in the order given; the order doubles as the sample axis.
pub fn diagram_svg(points_json: &str, k_max: u32) -> Result<String, String> {
    let points: Vec<DiagramPoint> = serde_json::from_str(points_json).map_err(|e| e.to_string())?;
    let mut samples = Vec::with_capacity(points.len());
    for (i, pt) in points.iter().enumerate() {
        let p = GitPoint::new(pt.x, pt.y);
        let region = classify_region(p, 2, DEFAULT_BOUNDARY_TOL)
            .map_err(|e| e.to_string())?
            .region;
        let epsilon = pt
            .signs
            .iter()
            .map(|s| {
                if s.is_empty() {
                    Ok(None)
                } else {
                    parse_signs(s).map(Some)
                }
            })
            .collect::<Result<_, _>>()?;
        samples.push(PlotSample {
            jacobi: i as f64,
            p,
            region,
            epsilon,
        });
    }
    to_svg(&samples, k_max).map_err(|e| e.to_string())
}

#[wasm_bindgen(js_name = classifyMatrix)]
pub fn classify_matrix_js(text: &str, unreduced: bool) -> Result<String, JsError> {
    classify_matrix_json(text, unreduced).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = locatePoint)]
pub fn locate_point_js(x: f64, y: f64) -> Result<String, JsError> {
    locate_point_json(x, y).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = diagramSvg)]
pub fn diagram_svg_js(points_json: &str, k_max: u32) -> Result<String, JsError> {
    diagram_svg(points_json, k_max).map_err(|e| JsError::new(&e))
}
