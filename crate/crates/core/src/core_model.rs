//! Reactor geometry, materials and control-rod homogenisation.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Macroscopic one-group cross-sections of a material (1/cm).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CrossSectionSet {
    pub sigma_a: f64,
    pub sigma_s: f64,
    pub sigma_f: f64,
    #[serde(default = "unit_nu")]
    pub nu: f64,
}

fn unit_nu() -> f64 {
    1.0
}

impl CrossSectionSet {
    /// Cross-sections with `nu = 1`, so `sigma_f` is the production term `νΣf`.
    pub const fn new(sigma_a: f64, sigma_s: f64, sigma_f: f64) -> Self {
        Self {
            sigma_a,
            sigma_s,
            sigma_f,
            nu: 1.0,
        }
    }

    pub fn nu_sigma_f(&self) -> f64 {
        self.nu * self.sigma_f
    }

    fn validate(&self, name: &str) -> Result<()> {
        let fields = [self.sigma_a, self.sigma_s, self.sigma_f, self.nu];
        if fields.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::Config(format!(
                "material '{name}' has negative or non-finite cross-sections"
            )));
        }
        Ok(())
    }
}

fn check_fraction(what: &str, v: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&v) {
        return Err(Error::Domain(format!("{what} = {v} outside [0, 1]")));
    }
    Ok(())
}

/// Mixing weight `r` of the absorber for insertion fraction `z`, chosen so the
/// reciprocal absorption cross-sections average linearly in `z`.
pub fn mixing_coefficient(z: f64, sigma_a_base: f64, sigma_a_rod: f64) -> Result<f64> {
    check_fraction("insertion fraction z", z)?;
    if !(sigma_a_base > 0.0 && sigma_a_rod > 0.0) {
        return Err(Error::Domain(
            "mixing_coefficient: absorption cross-sections must be positive".into(),
        ));
    }
    if z == 0.0 {
        return Ok(0.0);
    }
    if z == 1.0 {
        return Ok(1.0);
    }
    let num = z * sigma_a_base;
    Ok(num / (num + (1.0 - z) * sigma_a_rod))
}

/// Inverse of [`mixing_coefficient`]: the insertion fraction producing weight `r`.
pub fn insertion_for_mixing(r: f64, sigma_a_base: f64, sigma_a_rod: f64) -> Result<f64> {
    check_fraction("mixing coefficient r", r)?;
    if !(sigma_a_base > 0.0 && sigma_a_rod > 0.0) {
        return Err(Error::Domain(
            "insertion_for_mixing: absorption cross-sections must be positive".into(),
        ));
    }
    if r == 0.0 || r == 1.0 {
        return Ok(r);
    }
    let num = r * sigma_a_rod;
    Ok(num / (num + (1.0 - r) * sigma_a_base))
}

/// Convex blend `r·rod + (1 − r)·base` of every cross-section field.
pub fn homogenize(r: f64, rod: &CrossSectionSet, base: &CrossSectionSet) -> Result<CrossSectionSet> {
    check_fraction("mixing coefficient r", r)?;
    if r == 0.0 {
        return Ok(*base);
    }
    if r == 1.0 {
        return Ok(*rod);
    }
    let mix = |a: f64, b: f64| r * a + (1.0 - r) * b;
    Ok(CrossSectionSet {
        sigma_a: mix(rod.sigma_a, base.sigma_a),
        sigma_s: mix(rod.sigma_s, base.sigma_s),
        sigma_f: mix(rod.sigma_f, base.sigma_f),
        nu: mix(rod.nu, base.nu),
    })
}

/// `D = 1 / (3(Σa + Σs))`.
pub fn diffusion_coefficient(xs: &CrossSectionSet) -> Result<f64> {
    let total = xs.sigma_a + xs.sigma_s;
    if !(total > 0.0) {
        return Err(Error::Domain(format!(
            "diffusion_coefficient: Σa + Σs = {total} must be positive"
        )));
    }
    Ok(1.0 / (3.0 * total))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Boundary {
    /// Zero net current.
    Reflective,
    /// Vacuum (Marshak) condition `−D ∂φ/∂n = φ/2`.
    Bare,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EdgeBoundaries {
    pub left: Boundary,
    pub right: Boundary,
    #[serde(default = "default_bare")]
    pub bottom: Boundary,
    #[serde(default = "default_bare")]
    pub top: Boundary,
}

fn default_bare() -> Boundary {
    Boundary::Bare
}

impl EdgeBoundaries {
    pub const fn uniform(b: Boundary) -> Self {
        Self {
            left: b,
            right: b,
            bottom: b,
            top: b,
        }
    }
}

/// What occupies a cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CellRegion {
    /// Index into the case's material table.
    Material(usize),
    /// Index into `Geometry::rod_regions`.
    Rod(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct RodRegion {
    pub cells: Vec<usize>,
    /// Material the absorber is blended into.
    pub base: usize,
    pub rod: usize,
}

/// Structured mesh of interior cells. Cell `(i, j)` has index `i + nx·j`.
///
/// The single layer of ghost cells around the interior is implicit: it only
/// enters through the boundary treatment in assembly.
#[derive(Debug, Clone, PartialEq)]
pub struct Geometry {
    pub dims: usize,
    pub nx: usize,
    pub ny: usize,
    pub dx: f64,
    pub dy: f64,
    pub region_of_cell: Vec<CellRegion>,
    pub rod_regions: Vec<RodRegion>,
    pub boundary: EdgeBoundaries,
}

impl Geometry {
    pub fn n_cells(&self) -> usize {
        self.nx * self.ny
    }

    pub fn cell_center(&self, index: usize) -> (f64, f64) {
        let i = index % self.nx;
        let j = index / self.nx;
        ((i as f64 + 0.5) * self.dx, (j as f64 + 0.5) * self.dy)
    }
}

/// Control-rod insertion fractions, one per rod region.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RodConfig {
    pub z: Vec<f64>,
}

impl RodConfig {
    pub fn new(z: Vec<f64>) -> Result<Self> {
        for &v in &z {
            check_fraction("insertion fraction z", v)?;
        }
        Ok(Self { z })
    }
}

/// Per-cell cross-sections and diffusion coefficients over the interior cells.
#[derive(Debug, Clone, PartialEq)]
pub struct MaterialField {
    pub cells: Vec<CrossSectionSet>,
    pub diffusion: Vec<f64>,
}

/// Per-cell materials for rod configuration `config`.
pub fn build_material_field(
    geom: &Geometry,
    materials: &[CrossSectionSet],
    config: &RodConfig,
) -> Result<MaterialField> {
    if config.z.len() != geom.rod_regions.len() {
        return Err(Error::Config(format!(
            "rod configuration has {} entries, geometry has {} rod regions",
            config.z.len(),
            geom.rod_regions.len()
        )));
    }
    let lookup = |idx: usize| {
        materials
            .get(idx)
            .copied()
            .ok_or_else(|| Error::Config(format!("no material definition with index {idx}")))
    };

    let mut mixed = Vec::with_capacity(geom.rod_regions.len());
    for (region, &z) in geom.rod_regions.iter().zip(&config.z) {
        let base = lookup(region.base)?;
        let rod = lookup(region.rod)?;
        let r = mixing_coefficient(z, base.sigma_a, rod.sigma_a)?;
        mixed.push(homogenize(r, &rod, &base)?);
    }

    let cells = geom
        .region_of_cell
        .iter()
        .map(|region| match *region {
            CellRegion::Material(m) => lookup(m),
            CellRegion::Rod(k) => mixed
                .get(k)
                .copied()
                .ok_or_else(|| Error::Config(format!("cell refers to missing rod region {k}"))),
        })
        .collect::<Result<Vec<_>>>()?;
    let diffusion = cells
        .iter()
        .map(diffusion_coefficient)
        .collect::<Result<Vec<_>>>()?;
    Ok(MaterialField { cells, diffusion })
}

/// Axis-aligned extent; `y` is ignored for 1D cases.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Extent {
    pub x: [f64; 2],
    #[serde(default)]
    pub y: Option<[f64; 2]>,
}

impl Extent {
    fn contains(&self, (cx, cy): (f64, f64), dims: usize) -> bool {
        let inside = |[lo, hi]: [f64; 2], c: f64| lo <= c && c <= hi;
        inside(self.x, cx) && (dims == 1 || self.y.is_none_or(|y| inside(y, cy)))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Zone {
    pub material: String,
    #[serde(flatten)]
    pub extent: Extent,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RodRegionDef {
    pub base: String,
    pub rod: String,
    #[serde(flatten)]
    pub extent: Extent,
}

/// Declarative case description, loadable from TOML.
///
/// Zones are painted over the background in order; a cell belongs to a zone
/// or rod region when its centre lies inside the extent. Rod regions are
/// painted last and must not overlap.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaseDefinition {
    pub name: String,
    pub dims: usize,
    pub length_x: f64,
    #[serde(default)]
    pub length_y: Option<f64>,
    pub nx: usize,
    #[serde(default)]
    pub ny: Option<usize>,
    pub background: String,
    pub materials: BTreeMap<String, CrossSectionSet>,
    #[serde(default)]
    pub zones: Vec<Zone>,
    pub rod_regions: Vec<RodRegionDef>,
    pub boundary: EdgeBoundaries,
}

/// A resolved case: geometry plus material table.
#[derive(Debug, Clone, PartialEq)]
pub struct Case {
    pub name: String,
    pub geometry: Geometry,
    pub material_names: Vec<String>,
    pub materials: Vec<CrossSectionSet>,
}

impl CaseDefinition {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_toml_str(&std::fs::read_to_string(path)?)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    /// 10 cm fuel slab, 100 cells, absorber regions at [2.2, 2.5] and [7.5, 7.8] cm.
    pub fn slab1d() -> Self {
        let mut materials = BTreeMap::new();
        materials.insert("fuel".to_string(), CrossSectionSet::new(0.45, 2.0, 0.5));
        materials.insert("control_rod".to_string(), CrossSectionSet::new(0.9, 2.0, 0.0));
        let rod = |lo: f64, hi: f64| RodRegionDef {
            base: "fuel".into(),
            rod: "control_rod".into(),
            extent: Extent { x: [lo, hi], y: None },
        };
        Self {
            name: "slab1d".into(),
            dims: 1,
            length_x: 10.0,
            length_y: None,
            nx: 100,
            ny: None,
            background: "fuel".into(),
            materials,
            zones: Vec::new(),
            rod_regions: vec![rod(2.2, 2.5), rod(7.5, 7.8)],
            boundary: EdgeBoundaries::uniform(Boundary::Bare),
        }
    }

    /// 90 cm square core on an `n × n` grid (90 for the reference resolution):
    /// graphite surround, fuel over [10, 80]², and four 10 cm water/absorber
    /// rod regions centred at (25,35), (55,35), (25,65), (55,65).
    pub fn core2d(n: usize) -> Self {
        let mut materials = BTreeMap::new();
        materials.insert("fuel".to_string(), CrossSectionSet::new(0.075, 0.53, 0.79));
        materials.insert("water".to_string(), CrossSectionSet::new(0.01, 0.89, 0.0));
        materials.insert("control_rod".to_string(), CrossSectionSet::new(0.38, 0.2, 0.0));
        materials.insert("graphite".to_string(), CrossSectionSet::new(0.15, 0.5, 0.0));
        let rod = |cx: f64, cy: f64| RodRegionDef {
            base: "water".into(),
            rod: "control_rod".into(),
            extent: Extent {
                x: [cx - 5.0, cx + 5.0],
                y: Some([cy - 5.0, cy + 5.0]),
            },
        };
        Self {
            name: "core2d".into(),
            dims: 2,
            length_x: 90.0,
            length_y: Some(90.0),
            nx: n,
            ny: Some(n),
            background: "graphite".into(),
            materials,
            zones: vec![Zone {
                material: "fuel".into(),
                extent: Extent {
                    x: [10.0, 80.0],
                    y: Some([10.0, 80.0]),
                },
            }],
            rod_regions: vec![rod(25.0, 35.0), rod(55.0, 35.0), rod(25.0, 65.0), rod(55.0, 65.0)],
            boundary: EdgeBoundaries::uniform(Boundary::Bare),
        }
    }

    /// Built-in case by name: `slab1d` or `core2d`.
    pub fn preset(name: &str) -> Result<Self> {
        match name {
            "slab1d" => Ok(Self::slab1d()),
            "core2d" => Ok(Self::core2d(90)),
            other => Err(Error::Config(format!("unknown case preset '{other}'"))),
        }
    }

    pub fn resolve(&self) -> Result<Case> {
        if !(self.dims == 1 || self.dims == 2) {
            return Err(Error::Config(format!("dims must be 1 or 2, got {}", self.dims)));
        }
        let material_names: Vec<String> = self.materials.keys().cloned().collect();
        let materials: Vec<CrossSectionSet> = self.materials.values().copied().collect();
        for (name, xs) in material_names.iter().zip(&materials) {
            xs.validate(name)?;
        }
        let index_of = |name: &str| {
            material_names
                .iter()
                .position(|n| n == name)
                .ok_or_else(|| Error::Config(format!("material '{name}' is not defined")))
        };

        let nx = self.nx;
        let (ny, length_y) = if self.dims == 1 {
            (1, 1.0)
        } else {
            let ny = self
                .ny
                .ok_or_else(|| Error::Config("2D case needs ny".into()))?;
            let ly = self
                .length_y
                .ok_or_else(|| Error::Config("2D case needs length_y".into()))?;
            (ny, ly)
        };
        if nx == 0 || ny == 0 || !(self.length_x > 0.0 && length_y > 0.0) {
            return Err(Error::Config("mesh sizes and lengths must be positive".into()));
        }
        let dx = self.length_x / nx as f64;
        let dy = length_y / ny as f64;

        let mut geometry = Geometry {
            dims: self.dims,
            nx,
            ny,
            dx,
            dy,
            region_of_cell: vec![CellRegion::Material(index_of(&self.background)?); nx * ny],
            rod_regions: Vec::with_capacity(self.rod_regions.len()),
            boundary: self.boundary,
        };

        for zone in &self.zones {
            let m = index_of(&zone.material)?;
            for c in 0..nx * ny {
                if zone.extent.contains(geometry.cell_center(c), self.dims) {
                    geometry.region_of_cell[c] = CellRegion::Material(m);
                }
            }
        }
        for (k, def) in self.rod_regions.iter().enumerate() {
            let base = index_of(&def.base)?;
            let rod = index_of(&def.rod)?;
            let mut cells = Vec::new();
            for c in 0..nx * ny {
                if def.extent.contains(geometry.cell_center(c), self.dims) {
                    if let CellRegion::Rod(other) = geometry.region_of_cell[c] {
                        return Err(Error::Config(format!(
                            "rod regions {other} and {k} overlap at cell {c}"
                        )));
                    }
                    geometry.region_of_cell[c] = CellRegion::Rod(k);
                    cells.push(c);
                }
            }
            if cells.is_empty() {
                return Err(Error::Config(format!("rod region {k} contains no cell centres")));
            }
            geometry.rod_regions.push(RodRegion { cells, base, rod });
        }

        Ok(Case {
            name: self.name.clone(),
            geometry,
            material_names,
            materials,
        })
    }
}

impl Case {
    pub fn slab1d() -> Self {
        CaseDefinition::slab1d().resolve().expect("built-in slab case")
    }

    pub fn core2d(n: usize) -> Self {
        CaseDefinition::core2d(n).resolve().expect("built-in core case")
    }

    pub fn n_rods(&self) -> usize {
        self.geometry.rod_regions.len()
    }

    pub fn n_dof(&self) -> usize {
        self.geometry.n_cells()
    }

    pub fn with_boundary(mut self, boundary: EdgeBoundaries) -> Self {
        self.geometry.boundary = boundary;
        self
    }

    pub fn material(&self, name: &str) -> Option<&CrossSectionSet> {
        self.material_names
            .iter()
            .position(|n| n == name)
            .map(|i| &self.materials[i])
    }

    pub fn material_field(&self, config: &RodConfig) -> Result<MaterialField> {
        build_material_field(&self.geometry, &self.materials, config)
    }

    /// Converts per-region mixing coefficients into insertion fractions.
    pub fn insertion_from_mixing(&self, r: &[f64]) -> Result<RodConfig> {
        if r.len() != self.n_rods() {
            return Err(Error::Config(format!(
                "expected {} mixing coefficients, got {}",
                self.n_rods(),
                r.len()
            )));
        }
        let z = self
            .geometry
            .rod_regions
            .iter()
            .zip(r)
            .map(|(region, &rk)| {
                insertion_for_mixing(
                    rk,
                    self.materials[region.base].sigma_a,
                    self.materials[region.rod].sigma_a,
                )
            })
            .collect::<Result<Vec<_>>>()?;
        RodConfig::new(z)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const FUEL: CrossSectionSet = CrossSectionSet::new(0.45, 2.0, 0.5);
    const ROD: CrossSectionSet = CrossSectionSet::new(0.9, 2.0, 0.0);

    #[test]
    fn mixing_examples() {
        assert_eq!(mixing_coefficient(0.0, 0.45, 0.9).unwrap(), 0.0);
        assert_eq!(mixing_coefficient(1.0, 0.45, 0.9).unwrap(), 1.0);
        let r = mixing_coefficient(0.5, 0.45, 0.9).unwrap();
        assert!((r - 0.225 / (0.225 + 0.45)).abs() < 1e-15);
        assert!((r - 1.0 / 3.0).abs() < 1e-15);
        assert!(matches!(mixing_coefficient(1.5, 0.45, 0.9), Err(Error::Domain(_))));
        assert!(matches!(mixing_coefficient(-0.1, 0.45, 0.9), Err(Error::Domain(_))));
    }

    #[test]
    fn homogenize_examples() {
        assert_eq!(homogenize(0.0, &ROD, &FUEL).unwrap(), FUEL);
        assert_eq!(homogenize(1.0, &ROD, &FUEL).unwrap(), ROD);
        let mixed = homogenize(1.0 / 3.0, &ROD, &FUEL).unwrap();
        assert!((mixed.sigma_a - 0.6).abs() < 1e-15);
        assert!((mixed.sigma_s - 2.0).abs() < 1e-15);
        assert!((mixed.sigma_f - 0.5 * 2.0 / 3.0).abs() < 1e-15);
        assert!(homogenize(1.1, &ROD, &FUEL).is_err());
    }

    #[test]
    fn diffusion_examples() {
        assert!((diffusion_coefficient(&FUEL).unwrap() - 1.0 / 7.35).abs() < 1e-15);
        assert!((diffusion_coefficient(&ROD).unwrap() - 1.0 / 8.7).abs() < 1e-15);
        let unit = CrossSectionSet::new(1.0 / 6.0, 1.0 / 6.0, 0.0);
        assert!((diffusion_coefficient(&unit).unwrap() - 1.0).abs() < 1e-15);
        assert!(diffusion_coefficient(&CrossSectionSet::new(0.0, 0.0, 0.0)).is_err());
    }

    #[test]
    fn slab_layout() {
        let case = Case::slab1d();
        let g = &case.geometry;
        assert_eq!((g.nx, g.ny), (100, 1));
        assert!((g.dx - 0.1).abs() < 1e-15);
        assert_eq!(g.rod_regions[0].cells, vec![22, 23, 24]);
        assert_eq!(g.rod_regions[1].cells, vec![75, 76, 77]);
    }

    #[test]
    fn slab_material_fields() {
        let case = Case::slab1d();
        let field = case.material_field(&RodConfig::new(vec![0.0, 0.0]).unwrap()).unwrap();
        assert!(field.cells.iter().all(|c| *c == FUEL));
        let field = case.material_field(&RodConfig::new(vec![1.0, 0.0]).unwrap()).unwrap();
        for (c, xs) in field.cells.iter().enumerate() {
            let expect = if (22..25).contains(&c) { ROD } else { FUEL };
            assert_eq!(*xs, expect);
        }
        for (xs, d) in field.cells.iter().zip(&field.diffusion) {
            assert_eq!(*d, 1.0 / (3.0 * (xs.sigma_a + xs.sigma_s)));
        }
    }

    #[test]
    fn core_material_field_mixes_water() {
        let case = Case::core2d(90);
        assert_eq!(case.n_dof(), 8100);
        assert!(case.geometry.rod_regions.iter().all(|r| r.cells.len() == 100));
        let field = case
            .material_field(&RodConfig::new(vec![0.5, 0.0, 0.0, 0.0]).unwrap())
            .unwrap();
        let c = case.geometry.rod_regions[0].cells[0];
        let r: f64 = 0.5 * 0.01 / (0.5 * 0.01 + 0.5 * 0.38);
        assert!((r - 0.025641).abs() < 1e-6);
        assert!((field.cells[c].sigma_a - (r * 0.38 + (1.0 - r) * 0.01)).abs() < 1e-15);
        assert!((field.cells[c].sigma_a - 0.019487).abs() < 1e-6);
        // corner cell is graphite, core centre is fuel
        assert_eq!(field.cells[0], *case.material("graphite").unwrap());
        assert_eq!(field.cells[45 + 90 * 45], *case.material("fuel").unwrap());
    }

    #[test]
    fn wrong_rod_count_and_missing_material() {
        let case = Case::slab1d();
        assert!(matches!(
            case.material_field(&RodConfig { z: vec![0.1] }),
            Err(Error::Config(_))
        ));
        let mut def = CaseDefinition::slab1d();
        def.rod_regions[0].rod = "boron".into();
        assert!(matches!(def.resolve(), Err(Error::Config(_))));
        assert!(build_material_field(&case.geometry, &case.materials[..1], &RodConfig { z: vec![0.0, 0.0] }).is_err());
    }

    #[test]
    fn toml_round_trip_of_presets() {
        for def in [CaseDefinition::slab1d(), CaseDefinition::core2d(90)] {
            let text = def.to_toml_string().unwrap();
            assert_eq!(CaseDefinition::from_toml_str(&text).unwrap(), def);
        }
    }

    #[test]
    fn mixing_inverse() {
        let z = insertion_for_mixing(1.0 / 3.0, 0.45, 0.9).unwrap();
        assert!((z - 0.5).abs() < 1e-15);
    }

    proptest! {
        #[test]
        fn reciprocal_absorption_identity(z in 0.0f64..=1.0) {
            let r = mixing_coefficient(z, FUEL.sigma_a, ROD.sigma_a).unwrap();
            let hom = homogenize(r, &ROD, &FUEL).unwrap();
            let rhs = z / ROD.sigma_a + (1.0 - z) / FUEL.sigma_a;
            prop_assert!((1.0 / hom.sigma_a - rhs).abs() < 1e-12);
            prop_assert!((0.0..=1.0).contains(&r));
        }

        #[test]
        fn absorption_increases_with_insertion(a in 0.0f64..1.0, b in 0.0f64..1.0) {
            prop_assume!((a - b).abs() > 1e-9);
            let (lo, hi) = if a < b { (a, b) } else { (b, a) };
            let sa = |z| homogenize(mixing_coefficient(z, 0.01, 0.38).unwrap(), &CrossSectionSet::new(0.38, 0.2, 0.0), &CrossSectionSet::new(0.01, 0.89, 0.0)).unwrap().sigma_a;
            prop_assert!(sa(lo) < sa(hi));
        }

        #[test]
        fn mixing_inverse_round_trip(z in 0.0f64..=1.0) {
            let r = mixing_coefficient(z, 0.01, 0.38).unwrap();
            let back = insertion_for_mixing(r, 0.01, 0.38).unwrap();
            prop_assert!((back - z).abs() < 1e-12);
        }
    }
}
