/// Knobs of the dynamic timeout schedule.
#[derive(Debug, Clone, PartialEq)]
pub struct ControllerConfig {
    /// Starting timeout as a fraction of the cutoff.
    pub initial_fraction: f64,
    pub growth_factor: f64,
    pub plateau_window: usize,
    /// Relative improvement below which validation PAR10 counts as flat.
    pub plateau_tolerance: f64,
}

impl Default for ControllerConfig {
    fn default() -> Self {
        ControllerConfig {
            initial_fraction: 1.0 / 64.0,
            growth_factor: 2.0,
            plateau_window: 3,
            plateau_tolerance: 0.01,
        }
    }
}

/// Raises the run time limit geometrically whenever validation performance
/// stops improving, up to the scenario cutoff.
#[derive(Debug, Clone, PartialEq)]
pub struct DynamicTimeoutController {
    pub current: f64,
    pub initial: f64,
    pub growth_factor: f64,
    pub cap: f64,
    pub history: Vec<f64>,
    pub plateau_window: usize,
    pub plateau_tolerance: f64,
}

impl DynamicTimeoutController {
    pub fn new(cfg: &ControllerConfig, cap: f64) -> Self {
        assert!(cfg.growth_factor > 1.0, "growth factor must exceed 1");
        assert!(cfg.plateau_window >= 1, "plateau window must be at least 1");
        assert!(cfg.initial_fraction > 0.0, "initial timeout must be positive");
        let initial = (cap * cfg.initial_fraction).min(cap);
        DynamicTimeoutController {
            current: initial,
            initial,
            growth_factor: cfg.growth_factor,
            cap,
            history: Vec::new(),
            plateau_window: cfg.plateau_window,
            plateau_tolerance: cfg.plateau_tolerance,
        }
    }

    /// A controller pinned at the cap, for runs without dynamic timeouts.
    pub fn fixed(cap: f64) -> Self {
        DynamicTimeoutController {
            current: cap,
            initial: cap,
            growth_factor: 2.0,
            cap,
            history: Vec::new(),
            plateau_window: 1,
            plateau_tolerance: 0.0,
        }
    }

    pub fn at_cap(&self) -> bool {
        self.current >= self.cap
    }

    /// Records a validation score and raises the timeout on a plateau: the
    /// best of the last `plateau_window` scores improves on the score
    /// `plateau_window` evaluations back by less than the tolerance.
    /// Returns whether the timeout changed.
    pub fn maybe_increase_timeout(&mut self, validation_par10: f64) -> bool {
        if self.at_cap() {
            return false;
        }
        self.history.push(validation_par10);
        let w = self.plateau_window;
        if self.history.len() < w {
            return false;
        }
        let reference = self.history[self.history.len() - w];
        let best = self.history[self.history.len() - w..]
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min);
        let improvement = if reference > 0.0 {
            (reference - best) / reference
        } else {
            0.0
        };
        if improvement < self.plateau_tolerance {
            self.increase();
            true
        } else {
            false
        }
    }

    /// Unconditional step up, used when nothing is left to learn at the
    /// current limit.
    pub fn increase(&mut self) {
        self.current = (self.current * self.growth_factor).min(self.cap);
        self.history.clear();
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctrl() -> DynamicTimeoutController {
        DynamicTimeoutController::new(&ControllerConfig::default(), 3600.0)
    }

    #[test]
    fn defaults() {
        let c = ctrl();
        assert_eq!(c.current, 56.25);
        assert_eq!(c.initial, 56.25);
    }

    #[test]
    fn plateau_doubles_once() {
        let mut c = ctrl();
        let changes: Vec<bool> = [1000.0, 999.0, 998.5]
            .into_iter()
            .map(|v| c.maybe_increase_timeout(v))
            .collect();
        assert_eq!(changes, [false, false, true]);
        assert_eq!(c.current, 112.5);
        assert!(c.history.is_empty());
    }

    #[test]
    fn steady_improvement_keeps_timeout() {
        let mut c = ctrl();
        for v in [1000.0, 800.0, 600.0] {
            assert!(!c.maybe_increase_timeout(v));
        }
        assert_eq!(c.current, 56.25);
    }

    #[test]
    fn reaches_cap_after_six_increases_and_stays() {
        let mut c = ctrl();
        for _ in 0..6 {
            c.increase();
        }
        assert_eq!(c.current, 3600.0);
        for _ in 0..10 {
            assert!(!c.maybe_increase_timeout(1.0));
        }
        assert_eq!(c.current, 3600.0);
        assert!(c.history.is_empty());
    }

    #[test]
    fn fixed_is_at_cap() {
        let mut c = DynamicTimeoutController::fixed(100.0);
        assert!(c.at_cap());
        assert!(!c.maybe_increase_timeout(5.0));
        assert_eq!(c.current, 100.0);
    }
}
