//! Text formats: TOML documents with rationals written as `p/q` strings, and the flip log.

use serde::{Deserialize, Serialize};

use crate::canonize::{FlipStep, FlipTrace};
use crate::error::{Error, Result};
use crate::exact::{format_scalar, parse_scalar, Mat3, Scalar, Vec3};
use crate::group::{Cusp, GroupContext, GroupElem};
use crate::polyhedron::{Cell, CellDecomposition, Corner, Gluing, QuotientPolyhedron, TriangleClass};
use crate::structures::{goldman_structure, psl2_structure, series_structure, CuspSpec, Mat2, Provenance, StructureSpec, GOLDMAN_FIELDS};

type Row3 = [String; 3];

fn vec_out(v: &Vec3) -> Row3 {
    v.0.clone().map(|x| format_scalar(&x))
}

fn vec_in(r: &Row3) -> Result<Vec3> {
    Ok(Vec3([parse_scalar(&r[0])?, parse_scalar(&r[1])?, parse_scalar(&r[2])?]))
}

fn mat_out(m: &Mat3) -> [Row3; 3] {
    m.0.clone().map(|r| r.map(|x| format_scalar(&x)))
}

fn mat_in(rows: &[Row3; 3]) -> Result<Mat3> {
    Ok(Mat3([vec_in(&rows[0])?.0, vec_in(&rows[1])?.0, vec_in(&rows[2])?.0]))
}

fn mat2_out(m: &Mat2) -> [[String; 2]; 2] {
    m.clone().map(|r| r.map(|x| format_scalar(&x)))
}

fn mat2_in(m: &[[String; 2]; 2]) -> Result<Mat2> {
    let row = |r: &[String; 2]| -> Result<[Scalar; 2]> { Ok([parse_scalar(&r[0])?, parse_scalar(&r[1])?]) };
    Ok([row(&m[0])?, row(&m[1])?])
}

fn toml_in<T: for<'de> Deserialize<'de>>(text: &str) -> Result<T> {
    toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))
}

fn toml_out<T: Serialize>(value: &T) -> String {
    toml::to_string(value).expect("document types serialize")
}

#[derive(Serialize, Deserialize)]
struct GeneratorDoc {
    name: String,
    matrix: [Row3; 3],
}

#[derive(Serialize, Deserialize)]
struct CuspDoc {
    word: String,
    fixed: Row3,
    scale: String,
}

#[derive(Serialize, Deserialize)]
struct StructureDoc {
    provenance: String,
    genus: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    goldman: Option<std::collections::BTreeMap<String, String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    series: Option<SeriesDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    psl2: Option<Psl2Doc>,
    generators: Vec<GeneratorDoc>,
    cusps: Vec<CuspDoc>,
}

#[derive(Serialize, Deserialize)]
struct SeriesDoc {
    z: String,
    w: String,
}

#[derive(Serialize, Deserialize)]
struct Psl2Doc {
    a: [[String; 2]; 2],
    b: [[String; 2]; 2],
}

/// Structure file. Builder provenances are re-run on load and must agree with the stored matrices.
pub fn structure_to_string(s: &StructureSpec) -> String {
    let ctx = GroupContext::new(s.names.clone(), s.generators.clone(), Vec::new());
    let mut doc = StructureDoc {
        provenance: s.provenance.tag().into(),
        genus: s.genus,
        goldman: None,
        series: None,
        psl2: None,
        generators: s
            .names
            .iter()
            .zip(&s.generators)
            .map(|(name, m)| GeneratorDoc { name: name.clone(), matrix: mat_out(m) })
            .collect(),
        cusps: s
            .cusps
            .iter()
            .map(|c| CuspDoc { word: ctx.format_word(&c.word), fixed: vec_out(&c.fixed), scale: format_scalar(&c.scale) })
            .collect(),
    };
    match &s.provenance {
        Provenance::Explicit => {}
        Provenance::Goldman { values } => {
            doc.goldman = Some(
                GOLDMAN_FIELDS.iter().zip(values).map(|(k, v)| (k.to_string(), format_scalar(v))).collect(),
            )
        }
        Provenance::Series { z, w } => doc.series = Some(SeriesDoc { z: format_scalar(z), w: format_scalar(w) }),
        Provenance::Psl2Lift { a, b } => doc.psl2 = Some(Psl2Doc { a: mat2_out(a), b: mat2_out(b) }),
    }
    toml_out(&doc)
}

pub fn structure_from_str(text: &str) -> Result<StructureSpec> {
    let doc: StructureDoc = toml_in(text)?;
    let missing = |what: &str| Error::Parse(format!("{} provenance needs a [{what}] table", doc.provenance));
    let names: Vec<String> = doc.generators.iter().map(|g| g.name.clone()).collect();
    let generators = doc.generators.iter().map(|g| mat_in(&g.matrix)).collect::<Result<Vec<_>>>()?;
    let ctx = GroupContext::new(names.clone(), generators.clone(), Vec::new());
    let cusps = doc
        .cusps
        .iter()
        .map(|c| {
            Ok(CuspSpec { word: ctx.parse_word(&c.word)?, fixed: vec_in(&c.fixed)?, scale: parse_scalar(&c.scale)? })
        })
        .collect::<Result<Vec<_>>>()?;
    let built = match doc.provenance.as_str() {
        "explicit" => return StructureSpec::explicit(doc.genus, names, generators, cusps, Provenance::Explicit),
        "goldman" => {
            let table = doc.goldman.as_ref().ok_or_else(|| missing("goldman"))?;
            let mut values = Vec::new();
            for field in GOLDMAN_FIELDS {
                let v = table.get(field).ok_or_else(|| Error::Parse(format!("goldman parameter `{field}` missing")))?;
                values.push(parse_scalar(v)?);
            }
            goldman_structure(&values.try_into().expect("six values"))?.0
        }
        "series" => {
            let sd = doc.series.as_ref().ok_or_else(|| missing("series"))?;
            series_structure(&parse_scalar(&sd.z)?, &parse_scalar(&sd.w)?)?
        }
        "psl2-lift" => {
            let pd = doc.psl2.as_ref().ok_or_else(|| missing("psl2"))?;
            psl2_structure(&mat2_in(&pd.a)?, &mat2_in(&pd.b)?)?
        }
        other => return Err(Error::Parse(format!("unknown provenance `{other}`"))),
    };
    if built.names != names || built.generators != generators || built.cusps.len() != cusps.len() {
        return Err(Error::Parse("stored generators disagree with the provenance parameters".into()));
    }
    let mut spec = built;
    for (mine, stored) in spec.cusps.iter_mut().zip(&cusps) {
        if mine.word != stored.word || mine.fixed != stored.fixed {
            return Err(Error::Parse("stored cusp disagrees with the provenance parameters".into()));
        }
        mine.scale = stored.scale.clone();
    }
    StructureSpec::explicit(spec.genus, spec.names, spec.generators, spec.cusps, spec.provenance)
}

#[derive(Serialize, Deserialize)]
struct GroupDoc {
    generators: Vec<GeneratorDoc>,
    cusps: Vec<BaseCuspDoc>,
}

#[derive(Serialize, Deserialize)]
struct BaseCuspDoc {
    word: String,
    lift: Row3,
}

#[derive(Serialize, Deserialize)]
struct CornerDoc {
    lift: Row3,
    word: String,
    cusp: usize,
}

#[derive(Serialize, Deserialize)]
struct GluingDoc {
    tri: usize,
    edge: usize,
    word: String,
    matrix: [Row3; 3],
}

#[derive(Serialize, Deserialize)]
struct CellDoc {
    corners: Vec<CornerDoc>,
    gluings: Vec<GluingDoc>,
}

#[derive(Serialize, Deserialize)]
struct StepDoc {
    tri: usize,
    edge: usize,
    apex: Row3,
}

#[derive(Serialize, Deserialize)]
struct TraceDoc {
    terminated: bool,
    merges: Vec<usize>,
    steps: Vec<StepDoc>,
}

#[derive(Serialize, Deserialize)]
struct CellsDoc {
    kind: String,
    genus: usize,
    num_cusps: usize,
    group: GroupDoc,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    trace: Option<TraceDoc>,
    cells: Vec<CellDoc>,
}

fn group_out(g: &GroupContext) -> GroupDoc {
    GroupDoc {
        generators: g
            .names
            .iter()
            .zip(&g.generators)
            .map(|(name, m)| GeneratorDoc { name: name.clone(), matrix: mat_out(m) })
            .collect(),
        cusps: g.cusps.iter().map(|c| BaseCuspDoc { word: g.format_word(&c.word), lift: vec_out(&c.lift) }).collect(),
    }
}

fn group_in(d: &GroupDoc) -> Result<GroupContext> {
    let names = d.generators.iter().map(|g| g.name.clone()).collect();
    let gens = d.generators.iter().map(|g| mat_in(&g.matrix)).collect::<Result<Vec<_>>>()?;
    if gens.iter().any(|m| m.inv().is_err()) {
        return Err(Error::Parse("singular generator".into()));
    }
    let mut g = GroupContext::new(names, gens, Vec::new());
    g.cusps = d
        .cusps
        .iter()
        .map(|c| Ok(Cusp { word: g.parse_word(&c.word)?, lift: vec_in(&c.lift)? }))
        .collect::<Result<_>>()?;
    Ok(g)
}

fn corner_out(g: &GroupContext, c: &Corner) -> CornerDoc {
    CornerDoc { lift: vec_out(&c.lift), word: g.format_word(&c.word), cusp: c.cusp }
}

fn corner_in(g: &GroupContext, c: &CornerDoc) -> Result<Corner> {
    Ok(Corner { lift: vec_in(&c.lift)?, word: g.parse_word(&c.word)?, cusp: c.cusp })
}

fn gluing_out(g: &GroupContext, e: &Gluing) -> GluingDoc {
    GluingDoc { tri: e.tri, edge: e.edge, word: g.format_word(&e.g.word), matrix: mat_out(&e.g.mat) }
}

fn gluing_in(g: &GroupContext, e: &GluingDoc) -> Result<Gluing> {
    Ok(Gluing { tri: e.tri, edge: e.edge, g: GroupElem { mat: mat_in(&e.matrix)?, word: g.parse_word(&e.word)? } })
}

fn trace_out(t: &FlipTrace) -> TraceDoc {
    TraceDoc {
        terminated: t.terminated,
        merges: t.merges.clone(),
        steps: t.steps.iter().map(|s| StepDoc { tri: s.tri, edge: s.edge, apex: vec_out(&s.apex) }).collect(),
    }
}

fn trace_in(t: &TraceDoc) -> Result<FlipTrace> {
    Ok(FlipTrace {
        terminated: t.terminated,
        merges: t.merges.clone(),
        steps: t
            .steps
            .iter()
            .map(|s| Ok(FlipStep { tri: s.tri, edge: s.edge, apex: vec_in(&s.apex)? }))
            .collect::<Result<_>>()?,
    })
}

pub fn polyhedron_to_string(p: &QuotientPolyhedron) -> String {
    let g = &p.group;
    toml_out(&CellsDoc {
        kind: "polyhedron".into(),
        genus: p.genus,
        num_cusps: p.num_cusps,
        group: group_out(g),
        trace: None,
        cells: p
            .triangles
            .iter()
            .map(|t| CellDoc {
                corners: t.corners.iter().map(|c| corner_out(g, c)).collect(),
                gluings: t.neighbors.iter().map(|e| gluing_out(g, e)).collect(),
            })
            .collect(),
    })
}

pub fn decomposition_to_string(d: &CellDecomposition) -> String {
    let g = &d.group;
    toml_out(&CellsDoc {
        kind: "decomposition".into(),
        genus: d.genus,
        num_cusps: d.num_cusps,
        group: group_out(g),
        trace: Some(trace_out(&d.trace)),
        cells: d
            .faces
            .iter()
            .map(|f| CellDoc {
                corners: f.corners.iter().map(|c| corner_out(g, c)).collect(),
                gluings: f.edges.iter().map(|e| gluing_out(g, e)).collect(),
            })
            .collect(),
    })
}

pub fn polyhedron_from_str(text: &str) -> Result<QuotientPolyhedron> {
    let doc: CellsDoc = toml_in(text)?;
    if doc.kind != "polyhedron" {
        return Err(Error::Parse(format!("expected a polyhedron document, found `{}`", doc.kind)));
    }
    let group = group_in(&doc.group)?;
    let triangles = doc
        .cells
        .iter()
        .map(|c| {
            let corners = c.corners.iter().map(|x| corner_in(&group, x)).collect::<Result<Vec<_>>>()?;
            let neighbors = c.gluings.iter().map(|x| gluing_in(&group, x)).collect::<Result<Vec<_>>>()?;
            let bad = || Error::Parse("triangles need three corners and three gluings".into());
            Ok(TriangleClass {
                corners: corners.try_into().map_err(|_| bad())?,
                neighbors: neighbors.try_into().map_err(|_| bad())?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(QuotientPolyhedron { group, triangles, genus: doc.genus, num_cusps: doc.num_cusps })
}

/// Reads a decomposition; a polyhedron document is accepted and read as unmerged triangles.
pub fn decomposition_from_str(text: &str) -> Result<CellDecomposition> {
    let doc: CellsDoc = toml_in(text)?;
    if doc.kind == "polyhedron" {
        return Ok(polyhedron_from_str(text)?.cells());
    }
    if doc.kind != "decomposition" {
        return Err(Error::Parse(format!("unknown document kind `{}`", doc.kind)));
    }
    let group = group_in(&doc.group)?;
    let faces = doc
        .cells
        .iter()
        .map(|c| {
            Ok(Cell {
                corners: c.corners.iter().map(|x| corner_in(&group, x)).collect::<Result<_>>()?,
                edges: c.gluings.iter().map(|x| gluing_in(&group, x)).collect::<Result<_>>()?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let trace = doc.trace.as_ref().map(trace_in).transpose()?.unwrap_or_default();
    Ok(CellDecomposition { group, faces, genus: doc.genus, num_cusps: doc.num_cusps, trace })
}

pub fn trace_to_log(t: &FlipTrace) -> String {
    let mut out = String::new();
    for s in &t.steps {
        out.push_str(&format!("FLIP tri={} edge={} apex={}\n", s.tri, s.edge, s.apex));
    }
    for m in &t.merges {
        out.push_str(&format!("MERGE edge={m}\n"));
    }
    if t.terminated {
        out.push_str(&format!("DONE steps={}\n", t.steps.len()));
    }
    out
}

pub fn trace_from_log(text: &str) -> Result<FlipTrace> {
    let bad = |line: &str| Error::Parse(format!("bad trace line `{line}`"));
    let mut t = FlipTrace::default();
    for line in text.lines().filter(|l| !l.trim().is_empty()) {
        let mut parts = line.split_whitespace();
        let head = parts.next().ok_or_else(|| bad(line))?;
        let fields: Vec<(&str, &str)> =
            parts.map(|p| p.split_once('=').ok_or_else(|| bad(line))).collect::<Result<_>>()?;
        let get = |key: &str| fields.iter().find(|(k, _)| *k == key).map(|(_, v)| *v).ok_or_else(|| bad(line));
        let num = |key: &str| get(key)?.parse::<usize>().map_err(|_| bad(line));
        match head {
            "FLIP" => {
                let xs: Vec<Scalar> = get("apex")?.split(',').map(parse_scalar).collect::<Result<_>>()?;
                let apex = Vec3(xs.try_into().map_err(|_| bad(line))?);
                t.steps.push(FlipStep { tri: num("tri")?, edge: num("edge")?, apex });
            }
            "MERGE" => t.merges.push(num("edge")?),
            "DONE" => {
                if num("steps")? != t.steps.len() {
                    return Err(Error::Parse("DONE step count disagrees with the FLIP lines".into()));
                }
                t.terminated = true;
            }
            _ => return Err(bad(line)),
        }
    }
    Ok(t)
}

/// A 2x2 matrix file: `matrix = [["2", "1"], ["1", "1"]]`.
pub fn mat2_from_str(text: &str) -> Result<Mat2> {
    #[derive(Deserialize)]
    struct Doc {
        matrix: [[String; 2]; 2],
    }
    let doc: Doc = toml_in(text)?;
    mat2_in(&doc.matrix)
}
