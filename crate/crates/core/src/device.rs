//! UAV end device: kinetic, compute and transmission energy plus battery bookkeeping.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::network::BandwidthClass;
use crate::profiles::{cumulative_local_latency, VersionProfile};

pub const BATTERY_LEVELS: u8 = 10;

/// Fractions of the next slot spent in forward flight, vertical movement and
/// rotation. Whatever remains is hover.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ActivityProfile {
    pub forward: f64,
    pub vertical: f64,
    pub rotation: f64,
}

impl ActivityProfile {
    pub fn new(forward: f64, vertical: f64, rotation: f64) -> Result<Self> {
        let profile = Self {
            forward,
            vertical,
            rotation,
        };
        profile.validate()?;
        Ok(profile)
    }

    pub fn high() -> Self {
        Self {
            forward: 0.8,
            vertical: 0.1,
            rotation: 0.1,
        }
    }

    pub fn medium() -> Self {
        Self {
            forward: 0.5,
            vertical: 0.1,
            rotation: 0.1,
        }
    }

    pub fn low() -> Self {
        Self {
            forward: 0.2,
            vertical: 0.05,
            rotation: 0.05,
        }
    }

    pub fn hover_only() -> Self {
        Self {
            forward: 0.0,
            vertical: 0.0,
            rotation: 0.0,
        }
    }

    pub fn hover(&self) -> f64 {
        (1.0 - (self.forward + self.vertical + self.rotation)).max(0.0)
    }

    pub fn validate(&self) -> Result<()> {
        let parts = [self.forward, self.vertical, self.rotation];
        if parts.iter().any(|f| !(0.0..=1.0).contains(f)) || parts.iter().sum::<f64>() > 1.0 + 1e-12
        {
            return Err(Error::InvalidConfig(format!(
                "activity fractions {parts:?} must lie in [0, 1] and sum to at most 1"
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct UavBuild {
    pub build_id: String,
    pub forward_w: f64,
    pub vertical_w: f64,
    pub rotation_w: f64,
    pub hover_w: f64,
    pub battery_capacity_j: f64,
    #[serde(default = "one")]
    pub compute_scale: f64,
}

fn one() -> f64 {
    1.0
}

impl Default for UavBuild {
    fn default() -> Self {
        Self {
            build_id: "quad".into(),
            forward_w: 350.0,
            vertical_w: 450.0,
            rotation_w: 300.0,
            hover_w: 320.0,
            battery_capacity_j: 500_000.0,
            compute_scale: 1.0,
        }
    }
}

impl UavBuild {
    pub fn validate(&self) -> Result<()> {
        let rates = [
            self.forward_w,
            self.vertical_w,
            self.rotation_w,
            self.hover_w,
        ];
        let mut errors = Vec::new();
        if rates.iter().any(|r| !(*r > 0.0)) {
            errors.push(format!(
                "build `{}`: kinetic power rates must be > 0",
                self.build_id
            ));
        }
        if !(self.battery_capacity_j > 0.0) {
            errors.push(format!(
                "build `{}`: battery_capacity_j must be > 0",
                self.build_id
            ));
        }
        if !(self.compute_scale > 0.0) {
            errors.push(format!(
                "build `{}`: compute_scale must be > 0",
                self.build_id
            ));
        }
        if errors.is_empty() {
            Ok(())
        } else {
            Err(Error::Validation(errors))
        }
    }

    /// Cheapest possible kinetic drain for one slot.
    pub fn min_kinetic_power_w(&self) -> f64 {
        self.forward_w
            .min(self.vertical_w)
            .min(self.rotation_w)
            .min(self.hover_w)
    }
}

pub fn kinetic_energy_slot(activity: &ActivityProfile, build: &UavBuild, slot_s: f64) -> f64 {
    slot_s
        * (activity.forward * build.forward_w
            + activity.vertical * build.vertical_w
            + activity.rotation * build.rotation_w
            + activity.hover() * build.hover_w)
}

/// Energy to run layers `1..=l` locally. `compute_scale` multiplies both the
/// device power draw and the per-layer latency.
pub fn compute_energy(version: &VersionProfile, l: usize, compute_scale: f64) -> Result<f64> {
    let latency = cumulative_local_latency(version, l, compute_scale)?;
    Ok(compute_scale * version.device_power_w * latency)
}

pub fn transmission_energy(class: &BandwidthClass, output_mb: f64) -> f64 {
    class.energy_per_mb * output_mb
}

pub fn total_inference_energy(
    version: &VersionProfile,
    l: usize,
    compute_scale: f64,
    class: &BandwidthClass,
) -> Result<f64> {
    let compute = compute_energy(version, l, compute_scale)?;
    Ok(compute + transmission_energy(class, version.output_mb_at(l)?))
}

/// Quantized battery level: 0 means depleted, otherwise `ceil(10 * reserve / capacity)` in `1..=10`.
pub fn battery_level(reserve_j: f64, capacity_j: f64) -> u8 {
    if reserve_j <= 0.0 {
        return 0;
    }
    let level = (f64::from(BATTERY_LEVELS) * reserve_j / capacity_j).ceil();
    level.clamp(1.0, f64::from(BATTERY_LEVELS)) as u8
}

#[derive(Debug, Clone, PartialEq)]
pub struct UavState {
    pub uav_id: String,
    pub build: UavBuild,
    /// Effective multiplier on device latency and power (build × catalog scaling).
    pub compute_scale: f64,
    pub reserve_j: f64,
    pub battery_level: u8,
    pub task_flag: bool,
    pub bandwidth_class: usize,
    pub model_index: usize,
    pub activity: ActivityProfile,
}

impl UavState {
    pub fn new(
        uav_id: impl Into<String>,
        build: UavBuild,
        compute_scale: f64,
        model_index: usize,
    ) -> Self {
        let capacity = build.battery_capacity_j;
        Self {
            uav_id: uav_id.into(),
            build,
            compute_scale,
            reserve_j: capacity,
            battery_level: BATTERY_LEVELS,
            task_flag: false,
            bandwidth_class: 0,
            model_index,
            activity: ActivityProfile::high(),
        }
    }

    pub fn is_on(&self) -> bool {
        self.battery_level > 0
    }

    /// Removes up to `joules` from the reserve and returns the amount actually removed.
    pub fn drain_battery(&mut self, joules: f64) -> f64 {
        debug_assert!(joules >= 0.0);
        let taken = joules.min(self.reserve_j.max(0.0));
        self.reserve_j -= taken;
        self.battery_level = battery_level(self.reserve_j, self.build.battery_capacity_j);
        if !self.is_on() {
            self.task_flag = false;
        }
        taken
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::profiles::fixture_f1;
    use proptest::prelude::*;

    fn rel_close(a: f64, b: f64) -> bool {
        (a - b).abs() <= 1e-9 * b.abs().max(1e-12)
    }

    #[test]
    fn kinetic_examples() {
        let build = UavBuild::default();
        assert!(rel_close(
            kinetic_energy_slot(&ActivityProfile::high(), &build, 30.0),
            10_650.0
        ));
        assert!(rel_close(
            kinetic_energy_slot(&ActivityProfile::hover_only(), &build, 30.0),
            9_600.0
        ));
        assert_eq!(
            kinetic_energy_slot(&ActivityProfile::high(), &build, 0.0),
            0.0
        );
        assert!(ActivityProfile::new(0.6, 0.3, 0.2).is_err());
        assert!(ActivityProfile::new(-0.1, 0.0, 0.0).is_err());
        assert_eq!(ActivityProfile::high().hover(), 0.0);
    }

    #[test]
    fn compute_and_transmission_examples() {
        let cat = fixture_f1();
        let light = &cat.models[0].versions[0];
        let heavy = &cat.models[0].versions[1];
        assert!(rel_close(compute_energy(light, 2, 1.0).unwrap(), 5.4));
        assert!(rel_close(compute_energy(light, 4, 1.0).unwrap(), 8.4));
        assert!(rel_close(compute_energy(heavy, 6, 1.0).unwrap(), 17.5));
        assert!(compute_energy(light, 5, 1.0).is_err());

        let wide = BandwidthClass::wide();
        let narrow = BandwidthClass::narrow();
        assert!(rel_close(transmission_energy(&wide, 4.0), 0.2));
        assert!(rel_close(transmission_energy(&narrow, 8.0), 0.64));
        assert_eq!(transmission_energy(&wide, 0.0), 0.0);

        assert!(rel_close(
            total_inference_energy(light, 2, 1.0, &wide).unwrap(),
            5.6
        ));
        assert!(rel_close(
            total_inference_energy(light, 4, 1.0, &wide).unwrap(),
            8.4005
        ));
        assert!(rel_close(
            total_inference_energy(light, 2, 1.0, &narrow).unwrap(),
            5.72
        ));
    }

    #[test]
    fn inference_energy_monotone_in_cut_on_fixture() {
        let cat = fixture_f1();
        for class in [BandwidthClass::wide(), BandwidthClass::narrow()] {
            for version in &cat.models[0].versions {
                let energies: Vec<f64> = (1..=version.num_layers)
                    .map(|l| total_inference_energy(version, l, 1.0, &class).unwrap())
                    .collect();
                assert!(energies.windows(2).all(|w| w[0] <= w[1]), "{energies:?}");
            }
        }
    }

    #[test]
    fn drain_examples() {
        let mut uav = UavState::new("u0", UavBuild::default(), 1.0, 0);
        assert_eq!(uav.drain_battery(0.0), 0.0);
        assert_eq!(uav.battery_level, 10);
        assert_eq!(uav.drain_battery(410_000.0), 410_000.0);
        assert_eq!(uav.reserve_j, 90_000.0);
        assert_eq!(uav.battery_level, 2);
        assert_eq!(uav.drain_battery(100_000.0), 90_000.0);
        assert_eq!(uav.battery_level, 0);
        assert!(!uav.is_on());

        let mut full = UavState::new("u1", UavBuild::default(), 1.0, 0);
        full.drain_battery(500_000.0);
        assert_eq!(full.battery_level, 0);
    }

    proptest! {
        #[test]
        fn level_never_rises(drains in proptest::collection::vec(0.0f64..60_000.0, 1..40)) {
            let mut uav = UavState::new("u", UavBuild::default(), 1.0, 0);
            let mut prev = uav.battery_level;
            let mut removed = 0.0;
            for d in drains {
                removed += uav.drain_battery(d);
                prop_assert!(uav.battery_level <= prev);
                prev = uav.battery_level;
                prop_assert_eq!(uav.battery_level == 0, uav.reserve_j <= 0.0);
            }
            prop_assert!(((500_000.0 - uav.reserve_j) - removed).abs() <= 1e-9 * 500_000.0);
        }
    }
}
