// SPDX-License-Identifier: Apache-2.0

//! Versioned JSON documents for instances and placements.

use std::collections::BTreeSet;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::evaluator::CriterionReport;
use crate::io::IoError;
use crate::model::{
    validate_instance, Axis, Blockage, CostWeights, DistanceSpec, Instance, InterfaceEntry, Net, Placement, Point,
    ProximityPair, Rect, Side, SymmetryGroup, Variant,
};
use crate::scalar::Real;

pub const INSTANCE_FORMAT: &str = "amsplace-instance";
pub const PLACEMENT_FORMAT: &str = "amsplace-placement";
pub const VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RectDoc {
    pub name: String,
    pub variants: Vec<[i64; 2]>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DistancesDoc {
    #[serde(default)]
    pub default: i64,
    #[serde(default)]
    pub overrides: Vec<[i64; 3]>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetDoc<R> {
    pub members: Vec<usize>,
    pub cost: R,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AxisDoc {
    Vertical,
    Horizontal,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GroupDoc {
    pub axis: AxisDoc,
    #[serde(default)]
    pub pairs: Vec<[usize; 2]>,
    #[serde(default)]
    pub selfs: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BlockageDoc {
    pub x: i64,
    pub y: i64,
    pub w: i64,
    pub h: i64,
    #[serde(default)]
    pub restricted: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProximityDoc<R> {
    pub i: usize,
    pub j: usize,
    pub cost: R,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SideDoc {
    Left,
    Right,
    Top,
    Bottom,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InterfaceDoc<R> {
    pub side: SideDoc,
    pub members: Vec<usize>,
    pub cost: R,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeightsDoc<R> {
    pub c_area: R,
    pub c_conn: R,
    #[serde(default)]
    pub c_prox: R,
    #[serde(default)]
    pub c_inter: R,
}

impl<R: Real> Default for WeightsDoc<R> {
    fn default() -> Self {
        let w = CostWeights::<R>::default();
        Self { c_area: w.c_area, c_conn: w.c_conn, c_prox: w.c_prox, c_inter: w.c_inter }
    }
}

fn default_aspect<R: Real>() -> [R; 2] {
    [R::zero(), R::one()]
}

/// On-disk form of an [`Instance`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, bound = "R: Real")]
pub struct InstanceFile<R> {
    pub format: String,
    pub version: u32,
    pub rects: Vec<RectDoc>,
    #[serde(default)]
    pub distances: DistancesDoc,
    #[serde(default)]
    pub nets: Vec<NetDoc<R>>,
    #[serde(default)]
    pub groups: Vec<GroupDoc>,
    #[serde(default)]
    pub blockages: Vec<BlockageDoc>,
    #[serde(default)]
    pub proximities: Vec<ProximityDoc<R>>,
    #[serde(default)]
    pub interfaces: Vec<InterfaceDoc<R>>,
    #[serde(default = "default_aspect")]
    pub aspect: [R; 2],
    #[serde(default)]
    pub weights: WeightsDoc<R>,
}

impl<R: Real> InstanceFile<R> {
    pub fn from_instance(inst: &Instance<R>) -> Self {
        Self {
            format: INSTANCE_FORMAT.to_owned(),
            version: VERSION,
            rects: inst
                .rects
                .iter()
                .map(|r| RectDoc { name: r.name.clone(), variants: r.variants.iter().map(|v| [v.w, v.h]).collect() })
                .collect(),
            distances: DistancesDoc {
                default: inst.distances.default_distance(),
                overrides: inst.distances.overrides().map(|(i, j, a)| [i as i64, j as i64, a]).collect(),
            },
            nets: inst.nets.iter().map(|n| NetDoc { members: n.members.clone(), cost: n.cost }).collect(),
            groups: inst
                .groups
                .iter()
                .map(|g| GroupDoc {
                    axis: match g.axis {
                        Axis::Vertical => AxisDoc::Vertical,
                        Axis::Horizontal => AxisDoc::Horizontal,
                    },
                    pairs: g.pairs.iter().map(|&(i, j)| [i, j]).collect(),
                    selfs: g.selfs.clone(),
                })
                .collect(),
            blockages: inst
                .blockages
                .iter()
                .map(|b| BlockageDoc {
                    x: b.x,
                    y: b.y,
                    w: b.w,
                    h: b.h,
                    restricted: b.restricted.iter().copied().collect(),
                })
                .collect(),
            proximities: inst.proximities.iter().map(|q| ProximityDoc { i: q.i, j: q.j, cost: q.cost }).collect(),
            interfaces: inst
                .interfaces
                .iter()
                .map(|e| InterfaceDoc {
                    side: match e.side {
                        Side::Left => SideDoc::Left,
                        Side::Right => SideDoc::Right,
                        Side::Top => SideDoc::Top,
                        Side::Bottom => SideDoc::Bottom,
                    },
                    members: e.members.clone(),
                    cost: e.cost,
                })
                .collect(),
            aspect: [inst.aspect_lo, inst.aspect_hi],
            weights: WeightsDoc {
                c_area: inst.weights.c_area,
                c_conn: inst.weights.c_conn,
                c_prox: inst.weights.c_prox,
                c_inter: inst.weights.c_inter,
            },
        }
    }

    /// Convert to an instance, checking every schema rule and model invariant.
    pub fn into_instance(self) -> Result<Instance<R>, IoError> {
        check_header(&self.format, INSTANCE_FORMAT, self.version)?;
        let n = self.rects.len();
        let rects = self
            .rects
            .into_iter()
            .map(|r| Rect::new(r.name, r.variants.into_iter().map(|[w, h]| Variant::new(w, h)).collect()))
            .collect();
        let mut inst = Instance::new(rects);
        inst.distances = DistanceSpec::uniform(n, self.distances.default);
        for (k, &[i, j, a]) in self.distances.overrides.iter().enumerate() {
            let field = format!("distances.overrides[{k}]");
            if i < 0 || j < 0 || i >= j {
                return Err(schema(field, format!("pair ({i}, {j}) must satisfy 0 <= i < j")));
            }
            inst.distances.set(i as usize, j as usize, a).map_err(|e| schema(field, e.to_string()))?;
        }
        inst.nets = self.nets.into_iter().map(|e| Net::with_cost(e.members, e.cost)).collect();
        inst.groups = self
            .groups
            .into_iter()
            .map(|g| SymmetryGroup {
                axis: match g.axis {
                    AxisDoc::Vertical => Axis::Vertical,
                    AxisDoc::Horizontal => Axis::Horizontal,
                },
                pairs: g.pairs.into_iter().map(|[i, j]| (i, j)).collect(),
                selfs: g.selfs,
            })
            .collect();
        inst.blockages = self
            .blockages
            .into_iter()
            .map(|b| Blockage {
                x: b.x,
                y: b.y,
                w: b.w,
                h: b.h,
                restricted: b.restricted.into_iter().collect::<BTreeSet<_>>(),
            })
            .collect();
        inst.proximities =
            self.proximities.into_iter().map(|q| ProximityPair { i: q.i, j: q.j, cost: q.cost }).collect();
        inst.interfaces = self
            .interfaces
            .into_iter()
            .map(|e| InterfaceEntry {
                side: match e.side {
                    SideDoc::Left => Side::Left,
                    SideDoc::Right => Side::Right,
                    SideDoc::Top => Side::Top,
                    SideDoc::Bottom => Side::Bottom,
                },
                members: e.members,
                cost: e.cost,
            })
            .collect();
        inst.aspect_lo = self.aspect[0];
        inst.aspect_hi = self.aspect[1];
        inst.weights = CostWeights {
            c_area: self.weights.c_area,
            c_conn: self.weights.c_conn,
            c_prox: self.weights.c_prox,
            c_inter: self.weights.c_inter,
        };
        let issues = validate_instance(&inst);
        if !issues.is_empty() {
            let list: Vec<String> = issues.iter().map(ToString::to_string).collect();
            return Err(IoError::Invalid(list.join("; ")));
        }
        Ok(inst)
    }
}

/// Solver provenance stored with a placement.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverInfo {
    pub algorithm: String,
    pub seed: u64,
    pub wall_time_s: f64,
    #[serde(default)]
    pub evaluations: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlacedRect {
    pub name: String,
    pub x: i64,
    pub y: i64,
    pub variant: usize,
}

/// On-disk form of a [`Placement`] with its evaluation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, bound = "R: Real")]
pub struct PlacementFile<R> {
    pub format: String,
    pub version: u32,
    pub rects: Vec<PlacedRect>,
    /// Doubled symmetry-axis coordinates, one per group.
    #[serde(default)]
    pub axes: Vec<i64>,
    #[serde(default)]
    pub report: Option<CriterionReport<R>>,
    #[serde(default)]
    pub solver: Option<SolverInfo>,
}

impl<R: Real> PlacementFile<R> {
    /// Placement for `inst`; rectangles are matched by position and must carry the same names.
    pub fn to_placement(&self, inst: &Instance<R>) -> Result<Placement, IoError> {
        check_header(&self.format, PLACEMENT_FORMAT, self.version)?;
        if self.rects.len() != inst.len() {
            return Err(schema("rects", format!("{} entries for {} rectangles", self.rects.len(), inst.len())));
        }
        if self.axes.len() != inst.groups.len() {
            return Err(schema("axes", format!("{} entries for {} groups", self.axes.len(), inst.groups.len())));
        }
        for (k, (pr, r)) in self.rects.iter().zip(&inst.rects).enumerate() {
            if pr.name != r.name {
                return Err(schema(
                    format!("rects[{k}].name"),
                    format!("`{}` where `{}` was expected", pr.name, r.name),
                ));
            }
            if pr.variant >= r.variants.len() {
                return Err(schema(format!("rects[{k}].variant"), format!("{} out of range", pr.variant)));
            }
        }
        Ok(Placement {
            coords: self.rects.iter().map(|r| Point::new(r.x, r.y)).collect(),
            variants: self.rects.iter().map(|r| r.variant).collect(),
            axes: self.axes.clone(),
        })
    }
}

/// Build a placement document.
pub fn placement_file<R: Real>(
    inst: &Instance<R>,
    p: &Placement,
    report: Option<CriterionReport<R>>,
    solver: Option<SolverInfo>,
) -> PlacementFile<R> {
    PlacementFile {
        format: PLACEMENT_FORMAT.to_owned(),
        version: VERSION,
        rects: inst
            .rects
            .iter()
            .enumerate()
            .map(|(i, r)| PlacedRect {
                name: r.name.clone(),
                x: p.coords[i].x,
                y: p.coords[i].y,
                variant: p.variants[i],
            })
            .collect(),
        axes: p.axes.clone(),
        report,
        solver,
    }
}

fn schema(field: impl Into<String>, message: impl Into<String>) -> IoError {
    IoError::Schema { field: field.into(), message: message.into() }
}

fn check_header(format: &str, expected: &str, version: u32) -> Result<(), IoError> {
    if format != expected {
        return Err(schema("format", format!("`{format}` where `{expected}` was expected")));
    }
    if version != VERSION {
        return Err(schema("version", format!("unsupported version {version}, this build reads {VERSION}")));
    }
    Ok(())
}

/// Error text without serde_json's trailing position.
fn bare(e: &serde_json::Error) -> String {
    let s = e.to_string();
    match s.rfind(" at line ") {
        Some(i) => s[..i].to_owned(),
        None => s,
    }
}

fn from_json<T: DeserializeOwned>(text: &str) -> Result<T, IoError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner();
        if inner.is_syntax() || inner.is_eof() || path == "." {
            IoError::Syntax { line: inner.line(), column: inner.column(), message: bare(&inner) }
        } else {
            schema(path, bare(&inner))
        }
    })
}

fn to_json<T: Serialize>(doc: &T) -> String {
    let mut s = serde_json::to_string_pretty(doc).expect("documents contain only finite numbers and strings");
    s.push('\n');
    s
}

pub fn parse_instance<R: Real>(text: &str) -> Result<Instance<R>, IoError> {
    from_json::<InstanceFile<R>>(text)?.into_instance()
}

pub fn write_instance<R: Real>(inst: &Instance<R>) -> String {
    to_json(&InstanceFile::from_instance(inst))
}

/// Parse a placement document without binding it to an instance.
pub fn parse_placement<R: Real>(text: &str) -> Result<PlacementFile<R>, IoError> {
    let doc: PlacementFile<R> = from_json(text)?;
    check_header(&doc.format, PLACEMENT_FORMAT, doc.version)?;
    Ok(doc)
}

pub fn write_placement<R: Real>(doc: &PlacementFile<R>) -> String {
    to_json(doc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::decoder::{decode, Chromosome};
    use crate::evaluator::evaluate;
    use crate::syngen::{generate, GenParams};

    const MINIMAL: &str =
        r#"{"format": "amsplace-instance", "version": 1, "rects": [{"name": "m1", "variants": [[4, 2]]}]}"#;

    #[test]
    fn minimal_document() {
        let inst: Instance<f64> = parse_instance(MINIMAL).unwrap();
        assert_eq!(inst.len(), 1);
        assert_eq!(inst.rects[0].variants, vec![Variant::new(4, 2)]);
        assert_eq!((inst.aspect_lo, inst.aspect_hi), (0.0, 1.0));
        assert_eq!(inst.weights, CostWeights::default());
    }

    #[test]
    fn self_distance_override_is_a_schema_error() {
        let text = r#"{"format": "amsplace-instance", "version": 1,
            "rects": [{"name": "a", "variants": [[1, 1]]}, {"name": "b", "variants": [[1, 1]]}],
            "distances": {"default": 0, "overrides": [[0, 0, 3]]}}"#;
        match parse_instance::<f64>(text) {
            Err(IoError::Schema { field, .. }) => assert_eq!(field, "distances.overrides[0]"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn errors_carry_context() {
        match parse_instance::<f64>("{\n  \"format\": \"amsplace-instance\",\n  \"version\": 1,\n  \"rects\": [\n") {
            Err(IoError::Syntax { line, .. }) => assert!(line >= 4),
            other => panic!("unexpected {other:?}"),
        }
        let bad_field =
            r#"{"format": "amsplace-instance", "version": 1, "rects": [{"name": "a", "variants": [[1, "x"]]}]}"#;
        match parse_instance::<f64>(bad_field) {
            Err(IoError::Schema { field, .. }) => assert!(field.starts_with("rects[0].variants[0]"), "{field}"),
            other => panic!("unexpected {other:?}"),
        }
        let dangling = r#"{"format": "amsplace-instance", "version": 1, "rects": [{"name": "a", "variants": [[1, 1]]}],
            "nets": [{"members": [0, 5], "cost": 1.0}]}"#;
        assert!(matches!(parse_instance::<f64>(dangling), Err(IoError::Invalid(_))));
        let version = MINIMAL.replace("\"version\": 1", "\"version\": 7");
        assert!(matches!(parse_instance::<f64>(&version), Err(IoError::Schema { field, .. }) if field == "version"));
        let unknown = MINIMAL.replace("\"version\": 1,", "\"version\": 1, \"colour\": 3,");
        assert!(matches!(parse_instance::<f64>(&unknown), Err(IoError::Schema { .. })));
    }

    #[test]
    fn generated_instances_round_trip() {
        for seed in 0..100 {
            let params = GenParams {
                n_rects: 3 + (seed as usize % 25),
                n_nets_range: (1, 6),
                n_blockages: (seed % 3) as usize,
                with_symmetry: seed % 2 == 0,
                rng_seed: seed,
                ..GenParams::default()
            };
            let mut inst: Instance<f64> = generate(&params).unwrap();
            inst.weights = CostWeights { c_area: 1.0, c_conn: 8.0, c_prox: 0.3, c_inter: 0.1 };
            inst.aspect_lo = 0.25;
            let text = write_instance(&inst);
            assert_eq!(parse_instance::<f64>(&text).unwrap(), inst, "seed {seed}");
            assert_eq!(write_instance(&parse_instance::<f64>(&text).unwrap()), text);
        }
    }

    #[test]
    fn f32_instances_round_trip() {
        let inst: Instance<f32> = generate(&GenParams { n_rects: 10, rng_seed: 9, ..GenParams::default() }).unwrap();
        assert_eq!(parse_instance::<f32>(&write_instance(&inst)).unwrap(), inst);
    }

    #[test]
    fn placement_round_trip() {
        let inst: Instance<f64> =
            generate(&GenParams { n_rects: 8, with_symmetry: true, rng_seed: 2, ..GenParams::default() }).unwrap();
        let c = Chromosome::new((0..24).map(|k| k as f64 / 24.0).collect()).unwrap();
        let d = decode(&c, &inst).unwrap();
        let info = SolverInfo { algorithm: "ga".into(), seed: 5, wall_time_s: 0.25, evaluations: 100 };
        let doc = placement_file(&inst, &d.placement, Some(evaluate(&d.placement, &inst)), Some(info));
        let text = write_placement(&doc);
        let back: PlacementFile<f64> = parse_placement(&text).unwrap();
        assert_eq!(back, doc);
        assert_eq!(back.to_placement(&inst).unwrap(), d.placement);

        let mut renamed = doc.clone();
        renamed.rects[0].name = "zz".into();
        assert!(matches!(renamed.to_placement(&inst), Err(IoError::Schema { .. })));
    }
}
