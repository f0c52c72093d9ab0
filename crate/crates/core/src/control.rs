//! Baroreflex control laws.
//!
//! Each law modulates one circulation parameter as a function of the
//! baroreceptor activity `b ∈ [0, 1)`. Heart rate and systemic resistance
//! move against arterial pressure (`x1·(1 − b) + x2`); unstressed venous
//! volume and venous compliance move with it (`x1·b + x2`).
//!
//! Laws implement [`ControlLaw`] and are registered by name in a
//! [`ControlRegistry`], which is how configuration files select them.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use crate::error::{ModelError, Result};
use crate::params::CardioParams;

/// Circulation parameter a control law acts on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ControlledParameter {
    HeartRate,
    SystemicResistance,
    UnstressedVolume,
    VenousCompliance,
}

impl ControlledParameter {
    pub fn base_value(self, params: &CardioParams) -> f64 {
        match self {
            ControlledParameter::HeartRate => params.f_base,
            ControlledParameter::SystemicResistance => params.r_s_base,
            ControlledParameter::UnstressedVolume => params.v_d_base,
            ControlledParameter::VenousCompliance => params.c_sv_base,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            ControlledParameter::HeartRate => "F",
            ControlledParameter::SystemicResistance => "R_S",
            ControlledParameter::UnstressedVolume => "V_D",
            ControlledParameter::VenousCompliance => "C_SV",
        }
    }
}

/// The four parameters a baroreflex loop may modulate, as seen by the
/// vector field at one instant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EffectiveParams {
    pub f: f64,
    pub r_s: f64,
    pub v_d: f64,
    pub c_sv: f64,
}

impl EffectiveParams {
    pub fn resting(params: &CardioParams) -> Self {
        EffectiveParams {
            f: params.f_base,
            r_s: params.r_s_base,
            v_d: params.v_d_base,
            c_sv: params.c_sv_base,
        }
    }

    fn set(&mut self, target: ControlledParameter, value: f64) {
        match target {
            ControlledParameter::HeartRate => self.f = value,
            ControlledParameter::SystemicResistance => self.r_s = value,
            ControlledParameter::UnstressedVolume => self.v_d = value,
            ControlledParameter::VenousCompliance => self.c_sv = value,
        }
    }
}

/// A baroreflex control strategy.
pub trait ControlLaw: fmt::Debug + Send + Sync {
    /// Registry name, e.g. `unstressed_volume`.
    fn name(&self) -> &'static str;

    /// Parameter being modulated, `None` for the open-loop model.
    fn target(&self) -> Option<ControlledParameter>;

    /// Names of the law's constants, in the order of [`ControlLaw::constants`].
    fn constant_keys(&self) -> &'static [&'static str];

    fn constants(&self) -> Vec<f64>;

    /// Value of the controlled parameter at activity `b`.
    fn value(&self, activity: f64, params: &CardioParams) -> f64;

    /// Checks the law's own invariants: constants nonnegative and the
    /// activity-weighted constant strictly positive.
    fn validate(&self) -> Result<()> {
        let keys = self.constant_keys();
        for (i, (key, value)) in keys.iter().zip(self.constants()).enumerate() {
            if !value.is_finite() || value < 0.0 {
                return Err(ModelError::param(
                    *key,
                    format!("must be finite and nonnegative, got {value}"),
                ));
            }
            if i == 0 && value <= 0.0 {
                return Err(ModelError::param(*key, "must be strictly positive"));
            }
        }
        Ok(())
    }

    /// Resting value implied by the constants at `b = 1/2`, if the law is
    /// active.
    fn midpoint_value(&self) -> Option<f64> {
        let c = self.constants();
        self.target().map(|_| c[0] / 2.0 + c[1])
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoControl;

impl ControlLaw for NoControl {
    fn name(&self) -> &'static str {
        "linear"
    }
    fn target(&self) -> Option<ControlledParameter> {
        None
    }
    fn constant_keys(&self) -> &'static [&'static str] {
        &[]
    }
    fn constants(&self) -> Vec<f64> {
        Vec::new()
    }
    // Never consulted: there is no target to replace.
    fn value(&self, _activity: f64, _params: &CardioParams) -> f64 {
        f64::NAN
    }
}

/// `F = f1·(1 − b) + f2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HeartRate {
    pub f1: f64,
    pub f2: f64,
}

impl ControlLaw for HeartRate {
    fn name(&self) -> &'static str {
        "heart_rate"
    }
    fn target(&self) -> Option<ControlledParameter> {
        Some(ControlledParameter::HeartRate)
    }
    fn constant_keys(&self) -> &'static [&'static str] {
        &["f1", "f2"]
    }
    fn constants(&self) -> Vec<f64> {
        vec![self.f1, self.f2]
    }
    fn value(&self, activity: f64, _params: &CardioParams) -> f64 {
        self.f1 * (1.0 - activity) + self.f2
    }
}

/// `R_S = r1·(1 − b) + r2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SystemicResistance {
    pub r1: f64,
    pub r2: f64,
}

impl ControlLaw for SystemicResistance {
    fn name(&self) -> &'static str {
        "systemic_resistance"
    }
    fn target(&self) -> Option<ControlledParameter> {
        Some(ControlledParameter::SystemicResistance)
    }
    fn constant_keys(&self) -> &'static [&'static str] {
        &["r1", "r2"]
    }
    fn constants(&self) -> Vec<f64> {
        vec![self.r1, self.r2]
    }
    fn value(&self, activity: f64, _params: &CardioParams) -> f64 {
        self.r1 * (1.0 - activity) + self.r2
    }
}

/// `V_D = d1·b + d2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnstressedVolume {
    pub d1: f64,
    pub d2: f64,
}

impl ControlLaw for UnstressedVolume {
    fn name(&self) -> &'static str {
        "unstressed_volume"
    }
    fn target(&self) -> Option<ControlledParameter> {
        Some(ControlledParameter::UnstressedVolume)
    }
    fn constant_keys(&self) -> &'static [&'static str] {
        &["d1", "d2"]
    }
    fn constants(&self) -> Vec<f64> {
        vec![self.d1, self.d2]
    }
    fn value(&self, activity: f64, _params: &CardioParams) -> f64 {
        self.d1 * activity + self.d2
    }
}

/// `C_SV = c1·b + c2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VenousCompliance {
    pub c1: f64,
    pub c2: f64,
}

impl ControlLaw for VenousCompliance {
    fn name(&self) -> &'static str {
        "venous_compliance"
    }
    fn target(&self) -> Option<ControlledParameter> {
        Some(ControlledParameter::VenousCompliance)
    }
    fn constant_keys(&self) -> &'static [&'static str] {
        &["c1", "c2"]
    }
    fn constants(&self) -> Vec<f64> {
        vec![self.c1, self.c2]
    }
    fn value(&self, activity: f64, _params: &CardioParams) -> f64 {
        self.c1 * activity + self.c2
    }
}

/// Shared handle to a validated control law.
#[derive(Clone)]
pub struct ControlVariant(Arc<dyn ControlLaw>);

impl ControlVariant {
    /// Wraps a law after checking its invariants.
    pub fn new(law: impl ControlLaw + 'static) -> Result<Self> {
        law.validate()?;
        Ok(ControlVariant(Arc::new(law)))
    }

    pub fn linear() -> Self {
        ControlVariant(Arc::new(NoControl))
    }

    pub fn heart_rate(f1: f64, f2: f64) -> Result<Self> {
        Self::new(HeartRate { f1, f2 })
    }

    pub fn systemic_resistance(r1: f64, r2: f64) -> Result<Self> {
        Self::new(SystemicResistance { r1, r2 })
    }

    pub fn unstressed_volume(d1: f64, d2: f64) -> Result<Self> {
        Self::new(UnstressedVolume { d1, d2 })
    }

    pub fn venous_compliance(c1: f64, c2: f64) -> Result<Self> {
        Self::new(VenousCompliance { c1, c2 })
    }

    pub fn law(&self) -> &dyn ControlLaw {
        self.0.as_ref()
    }

    pub fn name(&self) -> &'static str {
        self.0.name()
    }

    pub fn target(&self) -> Option<ControlledParameter> {
        self.0.target()
    }

    pub fn is_active(&self) -> bool {
        self.0.target().is_some()
    }

    /// Effective value of the controlled parameter at activity `b`. The
    /// open-loop model controls nothing and yields `None`.
    pub fn control_value(&self, activity: f64, params: &CardioParams) -> Option<f64> {
        self.0.target().map(|_| self.0.value(activity, params))
    }

    pub fn effective(&self, activity: f64, params: &CardioParams) -> EffectiveParams {
        let mut eff = EffectiveParams::resting(params);
        if let Some(target) = self.0.target() {
            eff.set(target, self.0.value(activity, params));
        }
        eff
    }

    /// `x1/2 + x2 − base`; zero when the resting equilibrium is preserved.
    pub fn normalization_residual(&self, params: &CardioParams) -> Option<f64> {
        let target = self.0.target()?;
        self.0
            .midpoint_value()
            .map(|mid| mid - target.base_value(params))
    }

    pub fn check_normalized(&self, params: &CardioParams) -> Result<()> {
        let (Some(target), Some(residual)) = (self.target(), self.normalization_residual(params))
        else {
            return Ok(());
        };
        let base = target.base_value(params);
        if residual.abs() > 1e-9 * base.abs().max(1.0) {
            let keys = self.0.constant_keys();
            return Err(ModelError::param(
                format!("{}, {}", keys[0], keys[1]),
                format!(
                    "{k1}/2 + {k2} = {} does not equal the resting {} = {base}",
                    residual + base,
                    target.symbol(),
                    k1 = keys[0],
                    k2 = keys[1],
                ),
            ));
        }
        Ok(())
    }
}

impl fmt::Debug for ControlVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for ControlVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.name())?;
        let keys = self.0.constant_keys();
        if !keys.is_empty() {
            let parts: Vec<String> = keys
                .iter()
                .zip(self.0.constants())
                .map(|(k, v)| format!("{k}={v}"))
                .collect();
            write!(f, "{{{}}}", parts.join(", "))?;
        }
        Ok(())
    }
}

impl PartialEq for ControlVariant {
    fn eq(&self, other: &Self) -> bool {
        self.name() == other.name() && self.0.constants() == other.0.constants()
    }
}

pub type LawFactory = fn(&[f64]) -> Result<ControlVariant>;

#[derive(Debug, Clone)]
struct LawEntry {
    keys: &'static [&'static str],
    defaults: &'static [f64],
    build: LawFactory,
}

/// Name → constructor table for control laws.
#[derive(Debug, Clone, Default)]
pub struct ControlRegistry {
    entries: BTreeMap<&'static str, LawEntry>,
    aliases: BTreeMap<&'static str, &'static str>,
}

impl ControlRegistry {
    pub fn empty() -> Self {
        Self::default()
    }

    /// Registry holding the open-loop model and the four baroreflex loops.
    pub fn builtin() -> Self {
        let mut reg = Self::empty();
        reg.register("linear", &[], &[], |_| Ok(ControlVariant::linear()));
        reg.alias("none", "linear");
        reg.register("heart_rate", &["f1", "f2"], &[160.0, 0.0], |c| {
            ControlVariant::heart_rate(c[0], c[1])
        });
        reg.register("systemic_resistance", &["r1", "r2"], &[35.0, 0.0], |c| {
            ControlVariant::systemic_resistance(c[0], c[1])
        });
        reg.register("unstressed_volume", &["d1", "d2"], &[4.0, 0.0], |c| {
            ControlVariant::unstressed_volume(c[0], c[1])
        });
        reg.register("venous_compliance", &["c1", "c2"], &[1.5, 0.0], |c| {
            ControlVariant::venous_compliance(c[0], c[1])
        });
        reg
    }

    /// Adds or replaces a law. `defaults` must have the same length as `keys`.
    pub fn register(
        &mut self,
        name: &'static str,
        keys: &'static [&'static str],
        defaults: &'static [f64],
        build: LawFactory,
    ) {
        assert_eq!(keys.len(), defaults.len(), "one default per constant");
        self.entries.insert(
            name,
            LawEntry {
                keys,
                defaults,
                build,
            },
        );
    }

    pub fn alias(&mut self, alias: &'static str, target: &'static str) {
        self.aliases.insert(alias, target);
    }

    pub fn names(&self) -> impl Iterator<Item = &'static str> + '_ {
        self.entries.keys().copied()
    }

    fn entry(&self, name: &str) -> Option<&LawEntry> {
        let name = self.aliases.get(name).copied().unwrap_or(name);
        self.entries.get(name)
    }

    pub fn contains(&self, name: &str) -> bool {
        self.entry(name).is_some()
    }

    pub fn constant_keys(&self, name: &str) -> Option<&'static [&'static str]> {
        self.entry(name).map(|e| e.keys)
    }

    /// Every constant key any registered law accepts.
    pub fn all_constant_keys(&self) -> Vec<&'static str> {
        let mut keys: Vec<&'static str> = self
            .entries
            .values()
            .flat_map(|e| e.keys.iter().copied())
            .collect();
        keys.sort_unstable();
        keys.dedup();
        keys
    }

    /// Builds the named law. Missing constants take the law's defaults;
    /// constants that belong to a different law are rejected.
    pub fn build(&self, name: &str, supplied: &BTreeMap<String, f64>) -> Result<ControlVariant> {
        let entry = self.entry(name).ok_or_else(|| {
            let known: Vec<&str> = self.names().collect();
            ModelError::param(
                "variant",
                format!("unknown control law `{name}` (known: {})", known.join(", ")),
            )
        })?;
        if let Some(stray) = supplied.keys().find(|k| !entry.keys.contains(&k.as_str())) {
            return Err(ModelError::param(
                stray.clone(),
                format!("not a constant of control law `{name}`"),
            ));
        }
        let constants: Vec<f64> = entry
            .keys
            .iter()
            .zip(entry.defaults)
            .map(|(k, d)| supplied.get(*k).copied().unwrap_or(*d))
            .collect();
        (entry.build)(&constants)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn control_values() {
        let p = CardioParams::default();
        let hr = ControlVariant::heart_rate(80.0, 40.0).unwrap();
        assert_eq!(hr.control_value(0.5, &p), Some(80.0));

        let vd = ControlVariant::unstressed_volume(4.0, 0.0).unwrap();
        assert_eq!(vd.control_value(0.5, &p), Some(2.0));
        assert_eq!(ControlVariant::linear().control_value(0.5, &p), None);

        // b → 1 with f2 = 0 stops the heart.
        let hr0 = ControlVariant::heart_rate(160.0, 0.0).unwrap();
        let b = 1.0 - f64::EPSILON / 2.0;
        let f = hr0.control_value(b, &p).unwrap();
        assert!((0.0..1e-13).contains(&f));

        let csv = ControlVariant::venous_compliance(1.0, 0.25).unwrap();
        assert_eq!(csv.control_value(0.5, &p), Some(0.75));
        let rs = ControlVariant::systemic_resistance(20.0, 7.5).unwrap();
        assert_eq!(rs.control_value(0.5, &p), Some(17.5));
    }

    #[test]
    fn effective_replaces_only_the_target() {
        let p = CardioParams::default();
        let eff = ControlVariant::venous_compliance(1.5, 0.0)
            .unwrap()
            .effective(0.2, &p);
        assert!((eff.c_sv - 0.3).abs() < 1e-15);
        assert_eq!(eff.f, p.f_base);
        assert_eq!(eff.r_s, p.r_s_base);
        assert_eq!(eff.v_d, p.v_d_base);

        let lin = ControlVariant::linear().effective(0.9, &p);
        assert_eq!(lin, EffectiveParams::resting(&p));
    }

    #[test]
    fn constructor_invariants() {
        assert!(ControlVariant::heart_rate(0.0, 80.0).is_err());
        assert!(ControlVariant::unstressed_volume(4.0, -0.1).is_err());
        assert!(ControlVariant::venous_compliance(f64::INFINITY, 0.0).is_err());
        assert!(ControlVariant::systemic_resistance(35.0, 0.0).is_ok());
    }

    #[test]
    fn normalization() {
        let p = CardioParams::default();
        for v in [
            ControlVariant::heart_rate(160.0, 0.0),
            ControlVariant::heart_rate(80.0, 40.0),
            ControlVariant::heart_rate(40.0, 60.0),
            ControlVariant::systemic_resistance(35.0, 0.0),
            ControlVariant::systemic_resistance(20.0, 7.5),
            ControlVariant::systemic_resistance(15.0, 10.0),
            ControlVariant::unstressed_volume(3.0, 0.5),
            ControlVariant::venous_compliance(0.5, 0.5),
        ] {
            v.unwrap().check_normalized(&p).unwrap();
        }
        let bad = ControlVariant::unstressed_volume(3.0, 1.0).unwrap();
        assert_eq!(bad.normalization_residual(&p), Some(0.5));
        assert!(bad.check_normalized(&p).is_err());
        assert!(ControlVariant::linear().check_normalized(&p).is_ok());
    }

    #[test]
    fn registry_builds_by_name() {
        let reg = ControlRegistry::builtin();
        let mut c = BTreeMap::new();
        c.insert("d1".to_string(), 2.0);
        c.insert("d2".to_string(), 1.0);
        let v = reg.build("unstressed_volume", &c).unwrap();
        assert_eq!(v, ControlVariant::unstressed_volume(2.0, 1.0).unwrap());
        assert_eq!(v.to_string(), "unstressed_volume{d1=2, d2=1}");

        // Defaults fill in missing constants.
        let v = reg.build("heart_rate", &BTreeMap::new()).unwrap();
        assert_eq!(v, ControlVariant::heart_rate(160.0, 0.0).unwrap());

        assert_eq!(reg.build("none", &BTreeMap::new()).unwrap().name(), "linear");
        assert!(reg.build("venous_compliance", &c).is_err());
        assert!(reg.build("baroreflex", &BTreeMap::new()).is_err());
        assert_eq!(
            reg.all_constant_keys(),
            vec!["c1", "c2", "d1", "d2", "f1", "f2", "r1", "r2"]
        );
    }

    #[test]
    fn registry_accepts_new_laws() {
        #[derive(Debug)]
        struct Clamp(f64);
        impl ControlLaw for Clamp {
            fn name(&self) -> &'static str {
                "clamped_rate"
            }
            fn target(&self) -> Option<ControlledParameter> {
                Some(ControlledParameter::HeartRate)
            }
            fn constant_keys(&self) -> &'static [&'static str] {
                &["k1", "k2"]
            }
            fn constants(&self) -> Vec<f64> {
                vec![self.0, 0.0]
            }
            fn value(&self, _b: f64, _p: &CardioParams) -> f64 {
                self.0
            }
        }
        let mut reg = ControlRegistry::builtin();
        reg.register("clamped_rate", &["k1", "k2"], &[80.0, 0.0], |c| {
            ControlVariant::new(Clamp(c[0]))
        });
        let v = reg.build("clamped_rate", &BTreeMap::new()).unwrap();
        assert_eq!(v.effective(0.3, &CardioParams::default()).f, 80.0);
    }
}
