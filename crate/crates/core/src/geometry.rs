//! Equal-mass layer discretisation of a spherical capsule and the thermal
//! resistances along its conduction path.
//!
//! Layer numbers are 1-based in the public API (1 = innermost). Each layer
//! owns a node at its mid-volume radius, the radius that splits the layer
//! mass in half. Conduction between neighbouring layers runs node to node
//! through two half-shells, each with its own layer's conductivity.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{config_err, Error, Result};
use crate::properties::PcmProperties;
use crate::state::CapsuleState;

/// Relative tolerance between liquid-radius and solid-radius capsule masses.
pub const CAPSULE_MASS_TOLERANCE: f64 = 5e-3;

/// Layered capsule geometry.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CapsuleGeometry {
    pub n_lay: usize,
    /// Total PCM mass per capsule, kg.
    pub m_capsule: f64,
    /// PCM mass per layer, kg.
    pub m_lay: f64,
    /// Internal radius of the capsule with the PCM fully liquid, m.
    pub r_max: f64,
    /// PCM radius with the PCM fully solid, m.
    pub r_min: f64,
    /// Polymer coating thickness, m.
    pub shell_thickness: f64,
    /// Polymer coating conductivity, W/(m·K).
    pub k_shell: f64,
    /// Natural-convection coefficient on the capsule exterior, W/(m²·K).
    pub h_conv_ext: f64,
}

impl CapsuleGeometry {
    pub fn new(
        n_lay: usize,
        props: &PcmProperties,
        r_max: f64,
        r_min: f64,
        shell_thickness: f64,
        k_shell: f64,
        h_conv_ext: f64,
    ) -> Result<Self> {
        if n_lay == 0 {
            return Err(config_err(
                "model",
                "n_lay",
                "at least one layer is required",
            ));
        }
        if !(shell_thickness.is_finite() && shell_thickness >= 0.0) {
            return Err(config_err(
                "capsule",
                "shell_thickness",
                "must be non-negative",
            ));
        }
        if !(k_shell.is_finite() && k_shell > 0.0) {
            return Err(config_err("capsule", "k_shell", "must be positive"));
        }
        if !(h_conv_ext.is_finite() && h_conv_ext > 0.0) {
            return Err(config_err("capsule", "h_conv_ext", "must be positive"));
        }
        let m_capsule = capsule_mass(props, r_max, r_min)?;
        Ok(Self {
            n_lay,
            m_capsule,
            m_lay: m_capsule / n_lay as f64,
            r_max,
            r_min,
            shell_thickness,
            k_shell,
            h_conv_ext,
        })
    }
}

#[inline]
fn sphere_volume(r: f64) -> f64 {
    4.0 / 3.0 * PI * r * r * r
}

#[inline]
fn sphere_radius(volume: f64) -> f64 {
    (3.0 * volume / (4.0 * PI)).cbrt()
}

/// PCM mass of one capsule, from the liquid density and the fully-liquid
/// radius. The fully-solid radius must give the same mass to within
/// [`CAPSULE_MASS_TOLERANCE`].
pub fn capsule_mass(props: &PcmProperties, r_max: f64, r_min: f64) -> Result<f64> {
    if !(r_max > 0.0 && r_min > 0.0) {
        return Err(config_err("capsule", "r_max", "radii must be positive"));
    }
    let liquid = props.rho_liquid * sphere_volume(r_max);
    let solid = props.rho_solid * sphere_volume(r_min);
    let mismatch = (solid - liquid).abs() / liquid;
    if mismatch > CAPSULE_MASS_TOLERANCE {
        return Err(config_err(
            "capsule",
            "r_min",
            format!(
                "solid-phase mass {solid:.6} kg differs from liquid-phase mass {liquid:.6} kg \
                 by {:.3}%",
                100.0 * mismatch
            ),
        ));
    }
    Ok(liquid)
}

/// Layer boundary and node radii for one capsule state.
#[derive(Debug, Clone, PartialEq)]
pub struct LayerRadii {
    /// `n_lay + 1` radii, m; `boundaries[0] = 0`, the last is the PCM surface.
    pub boundaries: Vec<f64>,
    /// Mid-volume radius of each layer, m.
    pub nodes: Vec<f64>,
}

impl LayerRadii {
    pub fn n_lay(&self) -> usize {
        self.nodes.len()
    }

    /// Instantaneous outer PCM radius, m.
    pub fn outer(&self) -> f64 {
        *self.boundaries.last().expect("at least one boundary")
    }

    /// Volume of layer `k` (1-based), m³.
    pub fn shell_volume(&self, k: usize) -> f64 {
        sphere_volume(self.boundaries[k]) - sphere_volume(self.boundaries[k - 1])
    }
}

/// Boundaries built inside-out from each layer's phase-dependent volume
/// `m_lay / ρ_k`.
pub fn layer_radii(
    capsule: &CapsuleState,
    geom: &CapsuleGeometry,
    props: &PcmProperties,
) -> LayerRadii {
    let n = capsule.n_lay();
    let mut boundaries = Vec::with_capacity(n + 1);
    let mut nodes = Vec::with_capacity(n);
    boundaries.push(0.0);
    let mut volume = 0.0;
    for &h in &capsule.h_layers {
        let v = geom.m_lay / props.density(h);
        nodes.push(sphere_radius(volume + 0.5 * v));
        volume += v;
        boundaries.push(sphere_radius(volume));
    }
    LayerRadii { boundaries, nodes }
}

#[inline]
fn shell(r_inner: f64, r_outer: f64, k: f64) -> f64 {
    (1.0 / r_inner - 1.0 / r_outer) / (4.0 * PI * k)
}

/// Steady conduction resistance of a spherical shell, K/W.
pub fn shell_conduction_resistance(r_inner: f64, r_outer: f64, k: f64) -> Result<f64> {
    if r_inner == 0.0 {
        return Err(Error::InfiniteResistance);
    }
    if !(r_inner > 0.0 && r_outer >= r_inner) {
        return Err(Error::InvalidInput(format!(
            "shell radii must satisfy 0 < r_inner <= r_outer, got {r_inner} and {r_outer}"
        )));
    }
    if !(k.is_finite() && k > 0.0) {
        return Err(Error::InvalidInput(format!(
            "conductivity must be positive, got {k}"
        )));
    }
    Ok(shell(r_inner, r_outer, k))
}

/// Resistance between the node of layer `k` and the node of layer `k + 1`.
pub fn internode_resistance(
    k: usize,
    radii: &LayerRadii,
    capsule: &CapsuleState,
    props: &PcmProperties,
) -> Result<f64> {
    let n = radii.n_lay();
    if k == 0 || k >= n {
        return Err(Error::LayerIndex {
            index: k,
            min: 1,
            max: n.saturating_sub(1),
        });
    }
    Ok(internode_unchecked(k, radii, capsule, props))
}

#[inline]
fn internode_unchecked(
    k: usize,
    radii: &LayerRadii,
    capsule: &CapsuleState,
    props: &PcmProperties,
) -> f64 {
    let inner = props.conductivity(capsule.h_layers[k - 1]);
    let outer = props.conductivity(capsule.h_layers[k]);
    let boundary = radii.boundaries[k];
    shell(radii.nodes[k - 1], boundary, inner) + shell(boundary, radii.nodes[k], outer)
}

/// Coating conduction and exterior natural-convection resistances, K/W.
pub fn surface_resistance(radii: &LayerRadii, geom: &CapsuleGeometry) -> (f64, f64) {
    let r_pcm = radii.outer();
    let r_surface = r_pcm + geom.shell_thickness;
    let wall = if geom.shell_thickness == 0.0 {
        0.0
    } else {
        shell(r_pcm, r_surface, geom.k_shell)
    };
    let conv = 1.0 / (geom.h_conv_ext * 4.0 * PI * r_surface * r_surface);
    (wall, conv)
}

/// Series conduction resistance of the layers outside the latent front at
/// layer `k0`, taken from the node of `k0` to the node of the outermost
/// layer. This is the steady-state reduction of the internode chain, so the
/// front sees exactly the path it has in the full layer network.
///
/// `k0 = n_lay` gives 0: the outermost layer exchanges with the fluid
/// through the surface resistance alone.
pub fn clustered_outer_resistance(
    k0: usize,
    radii: &LayerRadii,
    capsule: &CapsuleState,
    props: &PcmProperties,
) -> Result<f64> {
    let n = radii.n_lay();
    if k0 == 0 || k0 > n {
        return Err(Error::LayerIndex {
            index: k0,
            min: 1,
            max: n,
        });
    }
    Ok((k0..n)
        .map(|k| internode_unchecked(k, radii, capsule, props))
        .sum())
}

/// Conduction network of one capsule state, evaluated once per step.
#[derive(Debug, Clone)]
pub(crate) struct CapsuleNetwork {
    /// `internode[k - 1]` joins the nodes of layers `k` and `k + 1`.
    pub internode: Vec<f64>,
    /// Coating plus exterior convection, K/W.
    pub surface: f64,
}

impl CapsuleNetwork {
    pub fn build(capsule: &CapsuleState, geom: &CapsuleGeometry, props: &PcmProperties) -> Self {
        let radii = layer_radii(capsule, geom, props);
        let internode = (1..capsule.n_lay())
            .map(|k| internode_unchecked(k, &radii, capsule, props))
            .collect();
        let (wall, conv) = surface_resistance(&radii, geom);
        Self {
            internode,
            surface: wall + conv,
        }
    }

    /// Cluster resistance outside front `k0` (1-based), excluding the surface.
    pub fn cluster(&self, k0: usize) -> f64 {
        self.internode[k0 - 1..].iter().sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn props() -> PcmProperties {
        PcmProperties::default()
    }

    fn geom(n_lay: usize) -> CapsuleGeometry {
        CapsuleGeometry::new(n_lay, &props(), 0.0285, 0.02759, 1e-3, 0.45, 40.0).unwrap()
    }

    #[test]
    fn default_capsule_mass() {
        let p = props();
        let m = capsule_mass(&p, 0.0285, 0.02759).unwrap();
        // Independent products of density and sphere volume.
        let liquid = 880.0 * 4.0 / 3.0 * PI * 0.0285f64.powi(3);
        let solid = 970.0 * 4.0 / 3.0 * PI * 0.02759f64.powi(3);
        assert_relative_eq!(m, liquid, max_relative = 1e-12);
        assert!((solid - liquid).abs() / liquid < 1e-3);
        assert!((m - 0.0853).abs() < 5e-5);
    }

    #[test]
    fn equal_density_degenerate_capsule() {
        let p = PcmProperties {
            rho_solid: 900.0,
            rho_liquid: 900.0,
            ..props()
        };
        let m = capsule_mass(&p, 0.03, 0.03).unwrap();
        assert_eq!(m, 900.0 * sphere_volume(0.03));
    }

    #[test]
    fn inconsistent_radii_are_rejected() {
        let p = props();
        // Solid radius that gives 5 % more mass than the liquid one.
        let liquid = p.rho_liquid * sphere_volume(0.0285);
        let r_min = sphere_radius(1.05 * liquid / p.rho_solid);
        assert!(matches!(
            capsule_mass(&p, 0.0285, r_min),
            Err(Error::Config { .. })
        ));
    }

    #[test]
    fn single_layer_radius_follows_phase() {
        let p = props();
        let g = geom(1);
        let liquid = layer_radii(&CapsuleState::fully_melted(1, &p), &g, &p);
        assert_relative_eq!(liquid.outer(), 0.0285, max_relative = 1e-12);
        let solid = layer_radii(&CapsuleState::fully_frozen(1, &p), &g, &p);
        let expected = (3.0 * g.m_capsule / (4.0 * PI * p.rho_solid)).cbrt();
        assert_relative_eq!(solid.outer(), expected, max_relative = 1e-12);
    }

    #[test]
    fn liquid_layers_have_equal_volume() {
        let p = props();
        let g = geom(10);
        let radii = layer_radii(&CapsuleState::fully_melted(10, &p), &g, &p);
        for k in 1..=10 {
            assert_relative_eq!(
                radii.shell_volume(k),
                g.m_lay / p.rho_liquid,
                max_relative = 1e-9
            );
        }
    }

    #[test]
    fn shell_formula() {
        assert_eq!(shell_conduction_resistance(0.02, 0.02, 0.25).unwrap(), 0.0);
        let r = shell_conduction_resistance(0.02, 0.0285, 0.25).unwrap();
        assert!((r - 4.747).abs() < 5e-4, "{r}");
        let half = shell_conduction_resistance(0.02, 0.0285, 0.5).unwrap();
        assert_relative_eq!(half, r / 2.0, max_relative = 1e-12);
        assert!(matches!(
            shell_conduction_resistance(0.0, 0.01, 0.25),
            Err(Error::InfiniteResistance)
        ));
    }

    #[test]
    fn internode_uniform_phase_collapses_to_one_shell() {
        let p = props();
        let g = geom(2);
        let capsule = CapsuleState::fully_frozen(2, &p);
        let radii = layer_radii(&capsule, &g, &p);
        let r = internode_resistance(1, &radii, &capsule, &p).unwrap();
        let direct =
            shell_conduction_resistance(radii.nodes[0], radii.nodes[1], p.k_solid).unwrap();
        assert_relative_eq!(r, direct, max_relative = 1e-12);
    }

    #[test]
    fn internode_mixed_phase_composes_half_shells() {
        let p = props();
        let g = geom(2);
        let capsule = CapsuleState::new(vec![p.h_lat_minus - 1000.0, p.h_lat_plus() + 1000.0]);
        let radii = layer_radii(&capsule, &g, &p);
        let r = internode_resistance(1, &radii, &capsule, &p).unwrap();
        let b = radii.boundaries[1];
        let expected = shell_conduction_resistance(radii.nodes[0], b, 0.25).unwrap()
            + shell_conduction_resistance(b, radii.nodes[1], 0.15).unwrap();
        assert_relative_eq!(r, expected, max_relative = 1e-12);
        assert!(matches!(
            internode_resistance(2, &radii, &capsule, &p),
            Err(Error::LayerIndex { .. })
        ));
    }

    #[test]
    fn surface_limits() {
        let p = props();
        let capsule = CapsuleState::fully_melted(10, &p);
        let stiff = CapsuleGeometry {
            h_conv_ext: f64::INFINITY,
            ..geom(10)
        };
        let radii = layer_radii(&capsule, &stiff, &p);
        let (wall, conv) = surface_resistance(&radii, &stiff);
        assert_eq!(conv, 0.0);
        assert!(wall > 0.0);

        let bare = CapsuleGeometry {
            shell_thickness: 0.0,
            ..geom(10)
        };
        let (wall, conv) = surface_resistance(&radii, &bare);
        assert_eq!(wall, 0.0);
        assert!(conv > 0.0 && conv.is_finite());

        let g = geom(10);
        let (wall, conv) = surface_resistance(&radii, &g);
        let r_s = 0.0285 + 1e-3;
        assert_relative_eq!(
            wall,
            (1.0 / 0.0285 - 1.0 / r_s) / (4.0 * PI * 0.45),
            max_relative = 1e-9
        );
        assert_relative_eq!(
            conv,
            1.0 / (40.0 * 4.0 * PI * r_s * r_s),
            max_relative = 1e-12
        );
    }

    #[test]
    fn cluster_of_outermost_layer_is_empty() {
        let p = props();
        let g = geom(10);
        let capsule = CapsuleState::fully_melted(10, &p);
        let radii = layer_radii(&capsule, &g, &p);
        assert_eq!(
            clustered_outer_resistance(10, &radii, &capsule, &p).unwrap(),
            0.0
        );
    }

    #[test]
    fn cluster_sums_solid_shells() {
        let p = props();
        let g = geom(10);
        let mut h = vec![p.h_lat_plus(); 5];
        h.extend(vec![p.h_lat_minus - 5000.0; 5]);
        let capsule = CapsuleState::new(h);
        let radii = layer_radii(&capsule, &g, &p);
        let cluster = clustered_outer_resistance(5, &radii, &capsule, &p).unwrap();
        // Outer half of the (liquid) front layer, then solid to the outer node.
        let b5 = radii.boundaries[5];
        let expected = shell(radii.nodes[4], b5, p.k_liquid) + shell(b5, radii.nodes[9], p.k_solid);
        assert_relative_eq!(cluster, expected, max_relative = 1e-12);
    }

    proptest! {
        #[test]
        fn telescoping(n in 2usize..40, k0_frac in 0.0f64..1.0) {
            let p = props();
            let g = geom(n);
            let capsule = CapsuleState::fully_frozen(n, &p);
            let radii = layer_radii(&capsule, &g, &p);
            let k0 = 1 + ((n - 1) as f64 * k0_frac) as usize;
            let cluster = clustered_outer_resistance(k0, &radii, &capsule, &p).unwrap();
            let single = shell(radii.nodes[k0 - 1], radii.nodes[n - 1], p.k_solid);
            prop_assert!((cluster - single).abs() <= 1e-12 * single.max(1e-300));
        }

        #[test]
        fn mass_conservation_and_monotone_radii(
            h in proptest::collection::vec(-60_000.0f64..220_000.0, 1..30)
        ) {
            let p = props();
            let g = geom(h.len());
            let capsule = CapsuleState::new(h);
            let radii = layer_radii(&capsule, &g, &p);
            let mass: f64 = (1..=capsule.n_lay())
                .map(|k| radii.shell_volume(k) * p.density(capsule.h_layers[k - 1]))
                .sum();
            prop_assert!((mass - g.m_capsule).abs() <= 1e-9 * g.m_capsule);
            for w in radii.boundaries.windows(2) {
                prop_assert!(w[1] > w[0]);
            }
            for k in 1..capsule.n_lay() {
                prop_assert!(internode_resistance(k, &radii, &capsule, &p).unwrap() >= 0.0);
            }
        }
    }
}
