//! Bill-of-materials quantities, mass rollup and aerostatic lift.

use std::f64::consts::PI;
use std::fmt;
use std::io::{self, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{
    derive_segment, fold_state, heron_area, GeometryError, KreslingParams, SegmentGeometry,
    Stability,
};
use crate::mesh::{build_mesh, enclosed_volume, MeshError};

/// Signed mass correction added to the component rollup by default, grams.
///
/// Mean residual between the reference build's reported extra payloads
/// for (n = 7, m = 4, lambda = 0.83..0.90) and the uncalibrated rollup; see
/// [`fit_mass_calibration`].
pub const DEFAULT_MASS_CALIBRATION_G: f64 = -33.52;

const MM2_PER_M2: f64 = 1e6;
const MM_PER_M: f64 = 1e3;
const REL_SLACK: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MassError {
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Mesh(#[from] MeshError),
    #[error("multi-body airships are not supported (body count {0})")]
    MultiBody(u32),
    #[error("invalid input `{field}` = {value}")]
    InvalidInput { field: &'static str, value: f64 },
}

/// Editable design parameters. Masses in grams, lengths in millimetres.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DesignInputs {
    /// `n`, polygon sides of the selected configuration.
    pub sides: u32,
    /// `m`, segments of the selected configuration.
    pub segments: u32,
    /// `lambda`, angle ratio of the selected configuration.
    pub lambda: f64,
    /// `D`, cylinder diameter bound.
    pub diameter_mm: f64,
    /// `H0`, folded height bound.
    pub folded_height_mm: f64,
    /// `H1`, unfolded height bound.
    pub unfolded_height_mm: f64,
    pub rho_air_kg_m3: f64,
    pub rho_helium_kg_m3: f64,
    /// `m_CT`, carbon tube linear density, g/m.
    pub tube_density_g_per_m: f64,
    /// `m_mecatrn`, board and wiring.
    pub mechatronics_g: f64,
    pub motor_g: f64,
    pub propeller_g: f64,
    pub motor_count: u32,
    pub battery_g: f64,
    pub battery_count: u32,
    /// `m_simpleTPUjct`.
    pub simple_junction_g: f64,
    /// `m_latticeeTPUjct`, junction carrying a micro-lattice patch.
    pub lattice_junction_g: f64,
    /// `N_patchs`.
    pub lattice_patch_count: u32,
    /// `d_env`, g/m^2.
    pub envelope_density_g_per_m2: f64,
    /// `d_glue`, g/m^2.
    pub glue_density_g_per_m2: f64,
    /// `t_ovlp`.
    pub weld_overlap_mm: f64,
    /// `N_seal`.
    pub seal_line_count: u32,
    /// `t_sheath`.
    pub sheath_width_mm: f64,
    /// `r_%`.
    pub sheath_ratio_pct: f64,
    pub valve_g: f64,
    pub valve_count: u32,
    /// `N_exo`; parsed, not evaluated.
    pub exoskeleton_count: u32,
    /// `N_CVNT`; only 1 is supported.
    pub body_count: u32,
    /// `m_kevlar`, g/m.
    pub kevlar_density_g_per_m: f64,
    /// `Dist_CVNT`; parsed, not evaluated.
    pub body_spacing_mm: f64,
    /// `L_tubes`, raw stock length.
    pub raw_tube_length_mm: f64,
    /// Kevlar wire length, m.
    pub kevlar_length_m: f64,
    /// Signed correction added to the total mass, g.
    pub mass_calibration_g: f64,
}

impl Default for DesignInputs {
    fn default() -> Self {
        Self {
            mass_calibration_g: DEFAULT_MASS_CALIBRATION_G,
            ..Self::table1_literal()
        }
    }
}

impl DesignInputs {
    /// Reference build parameters with no mass calibration.
    pub fn table1_literal() -> Self {
        Self {
            sides: 7,
            segments: 4,
            lambda: 0.9,
            diameter_mm: 720.0,
            folded_height_mm: 320.0,
            unfolded_height_mm: 2440.0,
            rho_air_kg_m3: 1.231,
            rho_helium_kg_m3: 0.1692,
            tube_density_g_per_m: 3.76,
            mechatronics_g: 30.0,
            motor_g: 9.1,
            propeller_g: 0.46,
            motor_count: 4,
            battery_g: 80.0,
            battery_count: 1,
            simple_junction_g: 0.75,
            lattice_junction_g: 3.4,
            lattice_patch_count: 17,
            envelope_density_g_per_m2: 70.0,
            glue_density_g_per_m2: 0.0,
            weld_overlap_mm: 10.0,
            seal_line_count: 2,
            sheath_width_mm: 35.0,
            sheath_ratio_pct: 10.0,
            valve_g: 7.0,
            valve_count: 1,
            exoskeleton_count: 0,
            body_count: 1,
            kevlar_density_g_per_m: 0.28,
            body_spacing_mm: 0.0,
            raw_tube_length_mm: 1000.0,
            kevlar_length_m: 0.0,
            mass_calibration_g: 0.0,
        }
    }

    pub fn validate(&self) -> Result<(), MassError> {
        let non_negative = [
            ("diameter_mm", self.diameter_mm),
            ("folded_height_mm", self.folded_height_mm),
            ("unfolded_height_mm", self.unfolded_height_mm),
            ("rho_air_kg_m3", self.rho_air_kg_m3),
            ("rho_helium_kg_m3", self.rho_helium_kg_m3),
            ("tube_density_g_per_m", self.tube_density_g_per_m),
            ("mechatronics_g", self.mechatronics_g),
            ("motor_g", self.motor_g),
            ("propeller_g", self.propeller_g),
            ("battery_g", self.battery_g),
            ("simple_junction_g", self.simple_junction_g),
            ("lattice_junction_g", self.lattice_junction_g),
            ("envelope_density_g_per_m2", self.envelope_density_g_per_m2),
            ("glue_density_g_per_m2", self.glue_density_g_per_m2),
            ("weld_overlap_mm", self.weld_overlap_mm),
            ("sheath_width_mm", self.sheath_width_mm),
            ("sheath_ratio_pct", self.sheath_ratio_pct),
            ("valve_g", self.valve_g),
            ("kevlar_density_g_per_m", self.kevlar_density_g_per_m),
            ("body_spacing_mm", self.body_spacing_mm),
            ("raw_tube_length_mm", self.raw_tube_length_mm),
            ("kevlar_length_m", self.kevlar_length_m),
        ];
        for (field, value) in non_negative {
            if !(value >= 0.0) || !value.is_finite() {
                return Err(MassError::InvalidInput { field, value });
            }
        }
        if !self.mass_calibration_g.is_finite() {
            return Err(MassError::InvalidInput {
                field: "mass_calibration_g",
                value: self.mass_calibration_g,
            });
        }
        if self.rho_helium_kg_m3 > self.rho_air_kg_m3 {
            return Err(MassError::InvalidInput {
                field: "rho_helium_kg_m3",
                value: self.rho_helium_kg_m3,
            });
        }
        if self.body_count > 1 {
            return Err(MassError::MultiBody(self.body_count));
        }
        Ok(())
    }

    /// Kresling parameters for `(n, m, lambda)` under these bounds.
    pub fn kresling(&self, sides: u32, segments: u32, lambda: f64) -> Result<KreslingParams, GeometryError> {
        KreslingParams::from_bounds(sides, segments, lambda, self.diameter_mm, self.folded_height_mm)
    }

    pub fn selected(&self) -> Result<KreslingParams, GeometryError> {
        self.kresling(self.sides, self.segments, self.lambda)
    }
}

/// Total carbon tube length `L_CVNT`, mm.
pub fn tube_length(geom: &SegmentGeometry, sides: u32, segments: u32) -> f64 {
    let n = f64::from(sides);
    let m = f64::from(segments);
    m * n * (geom.diagonal_g + geom.side_g + geom.side) + n * geom.side
}

/// Envelope membrane areas, mm^2.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EnvelopeSurface {
    pub caps_mm2: f64,
    pub walls_mm2: f64,
    pub sheath_length_mm: f64,
    pub sheath_mm2: f64,
}

impl EnvelopeSurface {
    pub fn total_m2(&self) -> f64 {
        (self.caps_mm2 + self.walls_mm2 + self.sheath_mm2) / MM2_PER_M2
    }

    /// Panel membrane only (caps and walls), m^2.
    pub fn panels_m2(&self) -> f64 {
        (self.caps_mm2 + self.walls_mm2) / MM2_PER_M2
    }
}

/// Envelope surface `S_CVNT`: two caps, `2 n m` wall triangles and the
/// sewn sheaths.
pub fn envelope_surface(
    geom: &SegmentGeometry,
    params: &KreslingParams,
    inputs: &DesignInputs,
) -> Result<EnvelopeSurface, GeometryError> {
    let n = f64::from(params.sides);
    let m = f64::from(params.segments);
    let caps_mm2 = 2.0 * n * geom.side * geom.side / (4.0 * geom.phi.tan());
    let walls_mm2 = m * 2.0 * n * heron_area(geom.side, geom.side_g, geom.diagonal_g)?;
    let tubes = tube_length(geom, params.sides, params.segments);
    let sheath_length_mm = (tubes - geom.diagonal_g * n * m) * inputs.sheath_ratio_pct / 100.0;
    Ok(EnvelopeSurface {
        caps_mm2,
        walls_mm2,
        sheath_length_mm,
        sheath_mm2: sheath_length_mm * inputs.sheath_width_mm,
    })
}

/// Component masses, grams. `total_g` = sum of parts + `calibration_g`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MassBreakdown {
    pub envelope_g: f64,
    pub sheath_g: f64,
    pub seal_overlap_g: f64,
    pub exoskeleton_tubes_g: f64,
    pub junctions_g: f64,
    pub kevlar_g: f64,
    pub mechatronics_g: f64,
    pub battery_g: f64,
    pub valves_g: f64,
    pub calibration_g: f64,
    pub total_g: f64,
}

impl MassBreakdown {
    pub fn parts(&self) -> [(&'static str, f64); 9] {
        [
            ("envelope", self.envelope_g),
            ("sheath", self.sheath_g),
            ("seal_overlap", self.seal_overlap_g),
            ("exoskeleton_tubes", self.exoskeleton_tubes_g),
            ("junctions", self.junctions_g),
            ("kevlar", self.kevlar_g),
            ("mechatronics", self.mechatronics_g),
            ("battery", self.battery_g),
            ("valves", self.valves_g),
        ]
    }

    pub fn parts_total(&self) -> f64 {
        self.parts().iter().map(|(_, g)| g).sum()
    }

    pub fn fractions(&self) -> MassFractions {
        let total = self.parts_total();
        MassFractions {
            envelope: (self.envelope_g + self.sheath_g + self.seal_overlap_g) / total,
            exoskeleton: (self.exoskeleton_tubes_g + self.junctions_g + self.kevlar_g) / total,
            mechatronics: self.mechatronics_g / total,
            battery: self.battery_g / total,
            valves: self.valves_g / total,
        }
    }
}

/// Grouped shares of the physical parts (calibration excluded).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MassFractions {
    pub envelope: f64,
    pub exoskeleton: f64,
    pub mechatronics: f64,
    pub battery: f64,
    pub valves: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DesignEvaluation {
    pub params: KreslingParams,
    pub tube_length_mm: f64,
    pub envelope_surface_m2: f64,
    pub sheath_surface_m2: f64,
    pub volume_deployed_m3: f64,
    pub volume_folded_m3: f64,
    pub lift_g: f64,
    pub mass: MassBreakdown,
    pub extra_payload_g: f64,
    pub deployed_height_mm: f64,
    pub folded_height_mm: f64,
    /// Lattice patches actually placed (capped at the vertex count).
    pub lattice_patches: u32,
    pub fits_height: bool,
    pub fits_folded: bool,
    pub feasible: bool,
}

pub fn evaluate_design(
    inputs: &DesignInputs,
    sides: u32,
    segments: u32,
    lambda: f64,
) -> Result<DesignEvaluation, MassError> {
    inputs.validate()?;
    let params = inputs.kresling(sides, segments, lambda)?;
    let geom = derive_segment(&params, Stability::RequireBistable)?;

    let deployed = fold_state(&geom, &params, geom.alpha_deployed)?;
    let volume_deployed_m3 = enclosed_volume(&build_mesh(&params, geom.alpha_deployed)?)?;
    let volume_folded_m3 = enclosed_volume(&build_mesh(&params, geom.alpha_folded)?)?;

    let n = params.sides;
    let m = params.segments;
    let tubes_mm = tube_length(&geom, n, m);
    let surface = envelope_surface(&geom, &params, inputs)?;
    let membrane_density = inputs.envelope_density_g_per_m2 + inputs.glue_density_g_per_m2;

    let vertices = params.vertex_count() as u32;
    let lattice_patches = inputs.lattice_patch_count.min(vertices);
    let simple_junctions = vertices - lattice_patches;
    let perimeter_mm = f64::from(n) * geom.side;

    let mut mass = MassBreakdown {
        envelope_g: surface.panels_m2() * membrane_density,
        sheath_g: surface.sheath_mm2 / MM2_PER_M2 * membrane_density,
        seal_overlap_g: f64::from(inputs.seal_line_count) * perimeter_mm * inputs.weld_overlap_mm
            / MM2_PER_M2
            * inputs.envelope_density_g_per_m2,
        exoskeleton_tubes_g: tubes_mm / MM_PER_M * inputs.tube_density_g_per_m,
        junctions_g: f64::from(lattice_patches) * inputs.lattice_junction_g
            + f64::from(simple_junctions) * inputs.simple_junction_g,
        kevlar_g: inputs.kevlar_length_m * inputs.kevlar_density_g_per_m,
        mechatronics_g: inputs.mechatronics_g
            + f64::from(inputs.motor_count) * (inputs.motor_g + inputs.propeller_g),
        battery_g: f64::from(inputs.battery_count) * inputs.battery_g,
        valves_g: f64::from(inputs.valve_count) * inputs.valve_g,
        calibration_g: inputs.mass_calibration_g,
        total_g: 0.0,
    };
    mass.total_g = mass.parts_total() + mass.calibration_g;

    // kg/m^3 * m^3 -> kg; grams-force of net buoyancy
    let lift_g = volume_deployed_m3 * (inputs.rho_air_kg_m3 - inputs.rho_helium_kg_m3) * 1000.0;
    let extra_payload_g = lift_g - mass.total_g;

    let deployed_height_mm = f64::from(m) * deployed.height;
    let folded_height_mm = f64::from(m) * params.h0_mm;
    let fits_height = deployed_height_mm <= inputs.unfolded_height_mm * (1.0 + REL_SLACK);
    let fits_folded = folded_height_mm <= inputs.folded_height_mm * (1.0 + REL_SLACK)
        && 2.0 * params.radius_mm <= inputs.diameter_mm * (1.0 + REL_SLACK);

    Ok(DesignEvaluation {
        params,
        tube_length_mm: tubes_mm,
        envelope_surface_m2: surface.total_m2(),
        sheath_surface_m2: surface.sheath_mm2 / MM2_PER_M2,
        volume_deployed_m3,
        volume_folded_m3,
        lift_g,
        mass,
        extra_payload_g,
        deployed_height_mm,
        folded_height_mm,
        lattice_patches,
        fits_height,
        fits_folded,
        feasible: extra_payload_g > 0.0 && fits_height && fits_folded,
    })
}

/// The `mass_calibration_g` that zeroes the mean residual between reported
/// and modelled extra payload over `(lambda, payload_g)` rows of one
/// `(n, m)` pair.
pub fn fit_mass_calibration(
    inputs: &DesignInputs,
    sides: u32,
    segments: u32,
    rows: &[(f64, f64)],
) -> Result<f64, MassError> {
    if rows.is_empty() {
        return Ok(inputs.mass_calibration_g);
    }
    let mut residual = 0.0;
    for &(lambda, reported) in rows {
        let eval = evaluate_design(inputs, sides, segments, lambda)?;
        residual += reported - eval.extra_payload_g;
    }
    Ok(inputs.mass_calibration_g - residual / rows.len() as f64)
}

/// One line of the bill of materials.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BomLine {
    pub component: &'static str,
    pub quantity: f64,
    pub unit: &'static str,
    pub unit_mass_g: f64,
    pub subtotal_g: f64,
}

pub fn bill_of_materials(inputs: &DesignInputs, eval: &DesignEvaluation) -> Vec<BomLine> {
    let vertices = eval.params.vertex_count() as f64;
    let patches = f64::from(eval.lattice_patches);
    let membrane = inputs.envelope_density_g_per_m2 + inputs.glue_density_g_per_m2;
    let line = |component, quantity: f64, unit, unit_mass_g: f64| BomLine {
        component,
        quantity,
        unit,
        unit_mass_g,
        subtotal_g: quantity * unit_mass_g,
    };
    let panel_m2 = eval.envelope_surface_m2 - eval.sheath_surface_m2;
    let p = &eval.params;
    let perimeter_mm = 2.0 * p.radius_mm * f64::from(p.sides) * (PI / f64::from(p.sides)).sin();
    let seal_m2 = f64::from(inputs.seal_line_count) * perimeter_mm * inputs.weld_overlap_mm / MM2_PER_M2;
    vec![
        line("carbon_tube", eval.tube_length_mm / MM_PER_M, "m", inputs.tube_density_g_per_m),
        line("simple_junction", vertices - patches, "pcs", inputs.simple_junction_g),
        line("lattice_junction", patches, "pcs", inputs.lattice_junction_g),
        line("envelope_membrane", panel_m2, "m2", membrane),
        line("sheath_membrane", eval.sheath_surface_m2, "m2", membrane),
        line("seal_overlap", seal_m2, "m2", inputs.envelope_density_g_per_m2),
        line("kevlar_wire", inputs.kevlar_length_m, "m", inputs.kevlar_density_g_per_m),
        line("mechatronics_board", 1.0, "pcs", inputs.mechatronics_g),
        line("motor", f64::from(inputs.motor_count), "pcs", inputs.motor_g),
        line("propeller", f64::from(inputs.motor_count), "pcs", inputs.propeller_g),
        line("battery", f64::from(inputs.battery_count), "pcs", inputs.battery_g),
        line("valve", f64::from(inputs.valve_count), "pcs", inputs.valve_g),
        line("mass_calibration", 1.0, "lot", inputs.mass_calibration_g),
    ]
}

pub fn write_bom_csv<W: Write>(mut w: W, header: &[String], lines: &[BomLine]) -> io::Result<()> {
    for h in header {
        writeln!(w, "# {h}")?;
    }
    writeln!(w, "component,quantity,unit,unit_mass_g,subtotal_g")?;
    for l in lines {
        writeln!(
            w,
            "{},{:.6},{},{:.6},{:.6}",
            l.component, l.quantity, l.unit, l.unit_mass_g, l.subtotal_g
        )?;
    }
    let total: f64 = lines.iter().map(|l| l.subtotal_g).sum();
    writeln!(w, "total,,,,{total:.6}")
}

/// Which tube family an edge belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub enum EdgeClass {
    /// Polygon side `s`.
    Side,
    /// Panel side `b_g`.
    Panel,
    /// Valley diagonal `d_g`.
    Diagonal,
}

impl fmt::Display for EdgeClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EdgeClass::Side => "s",
            EdgeClass::Panel => "b_g",
            EdgeClass::Diagonal => "d_g",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TubeCut {
    pub class: EdgeClass,
    pub length_mm: f64,
}

/// Every exoskeleton edge: `n (m + 1)` sides, `n m` panel sides and
/// `n m` diagonals.
pub fn exoskeleton_cuts(geom: &SegmentGeometry, sides: u32, segments: u32) -> Vec<TubeCut> {
    let n = sides as usize;
    let m = segments as usize;
    let mut cuts = Vec::with_capacity(n * (3 * m + 1));
    let mut push = |class, length_mm, count| {
        cuts.extend(std::iter::repeat_n(TubeCut { class, length_mm }, count));
    };
    push(EdgeClass::Side, geom.side, n * (m + 1));
    push(EdgeClass::Panel, geom.side_g, n * m);
    push(EdgeClass::Diagonal, geom.diagonal_g, n * m);
    cuts
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CutError {
    #[error("stock length must be positive, got {0} mm")]
    BadStock(f64),
    #[error("{class} edge of {length_mm:.1} mm exceeds the {stock_mm:.1} mm stock")]
    TooLong {
        class: EdgeClass,
        length_mm: f64,
        stock_mm: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StockBar {
    pub cuts: Vec<TubeCut>,
    pub used_mm: f64,
    pub waste_mm: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CutPlan {
    pub stock_mm: f64,
    pub bars: Vec<StockBar>,
}

impl CutPlan {
    pub fn total_waste_mm(&self) -> f64 {
        self.bars.iter().map(|b| b.waste_mm).sum()
    }

    pub fn write_text<W: Write>(&self, mut w: W, header: &[String]) -> io::Result<()> {
        for h in header {
            writeln!(w, "# {h}")?;
        }
        writeln!(w, "stock length: {:.1} mm", self.stock_mm)?;
        writeln!(w, "bars: {}", self.bars.len())?;
        writeln!(w, "total waste: {:.1} mm", self.total_waste_mm())?;
        for (i, bar) in self.bars.iter().enumerate() {
            let cuts: Vec<String> = bar
                .cuts
                .iter()
                .map(|c| format!("{} {:.1}", c.class, c.length_mm))
                .collect();
            writeln!(
                w,
                "bar {:3}: {} | waste {:.1} mm",
                i + 1,
                cuts.join(", "),
                bar.waste_mm
            )?;
        }
        Ok(())
    }
}

/// First-fit-decreasing assignment of cuts to stock bars. Kerf is ignored.
pub fn cut_plan(cuts: &[TubeCut], stock_mm: f64) -> Result<CutPlan, CutError> {
    if !(stock_mm > 0.0) || !stock_mm.is_finite() {
        return Err(CutError::BadStock(stock_mm));
    }
    let slack = stock_mm * REL_SLACK;
    if let Some(c) = cuts.iter().find(|c| c.length_mm > stock_mm + slack) {
        return Err(CutError::TooLong {
            class: c.class,
            length_mm: c.length_mm,
            stock_mm,
        });
    }
    let mut sorted = cuts.to_vec();
    // stable: equal lengths keep their class order
    sorted.sort_by(|a, b| b.length_mm.total_cmp(&a.length_mm));

    let mut bars: Vec<StockBar> = Vec::new();
    for cut in sorted {
        match bars
            .iter_mut()
            .find(|bar| bar.used_mm + cut.length_mm <= stock_mm + slack)
        {
            Some(bar) => {
                bar.used_mm += cut.length_mm;
                bar.cuts.push(cut);
            }
            None => bars.push(StockBar {
                cuts: vec![cut],
                used_mm: cut.length_mm,
                waste_mm: 0.0,
            }),
        }
    }
    for bar in &mut bars {
        bar.waste_mm = (stock_mm - bar.used_mm).max(0.0);
    }
    Ok(CutPlan { stock_mm, bars })
}
