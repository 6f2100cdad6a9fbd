use std::fmt;
use std::str::FromStr;

/// Sweep axis written `min:max:steps`, or a single value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    pub min: f64,
    pub max: f64,
    pub steps: usize,
}

impl Grid {
    pub fn point(value: f64) -> Self {
        Self { min: value, max: value, steps: 1 }
    }

    pub fn new(min: f64, max: f64, steps: usize) -> Result<Self, String> {
        if !min.is_finite() || !max.is_finite() {
            return Err(format!("grid bounds must be finite (got {min}, {max})"));
        }
        if steps < 2 {
            return Err(format!("a range needs at least 2 steps (got {steps})"));
        }
        if !(min < max) {
            return Err(format!("grid minimum {min} must be below maximum {max}"));
        }
        Ok(Self { min, max, steps })
    }

    /// Evenly spaced points, endpoints exact.
    pub fn linear(&self) -> Vec<f64> {
        if self.steps == 1 {
            return vec![self.min];
        }
        let h = (self.max - self.min) / (self.steps - 1) as f64;
        let mut v: Vec<f64> = (0..self.steps).map(|i| self.min + h * i as f64).collect();
        v[self.steps - 1] = self.max;
        v
    }

    /// Geometrically spaced points, endpoints exact; requires `min > 0`.
    pub fn log(&self) -> Result<Vec<f64>, String> {
        if !(self.min > 0.0) {
            return Err(format!("logarithmic grid needs a positive minimum (got {})", self.min));
        }
        if self.steps == 1 {
            return Ok(vec![self.min]);
        }
        let (l0, l1) = (self.min.ln(), self.max.ln());
        let h = (l1 - l0) / (self.steps - 1) as f64;
        let mut v: Vec<f64> = (0..self.steps).map(|i| (l0 + h * i as f64).exp()).collect();
        v[0] = self.min;
        v[self.steps - 1] = self.max;
        Ok(v)
    }

    /// Linear points that must all be strictly positive (pointer widths).
    pub fn positive_linear(&self) -> Result<Vec<f64>, String> {
        if !(self.min > 0.0) {
            return Err(format!("pointer widths must be positive (got {})", self.min));
        }
        Ok(self.linear())
    }
}

impl FromStr for Grid {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Vec<&str> = s.split(':').collect();
        let num = |t: &str| t.trim().parse::<f64>().map_err(|e| format!("bad number {t:?}: {e}"));
        match parts.as_slice() {
            [v] => {
                let v = num(v)?;
                if !v.is_finite() {
                    return Err(format!("value must be finite (got {v})"));
                }
                Ok(Self::point(v))
            }
            [a, b, n] => {
                let n = n.trim().parse::<usize>().map_err(|e| format!("bad step count {n:?}: {e}"))?;
                Self::new(num(a)?, num(b)?, n)
            }
            _ => Err(format!("expected MIN:MAX:STEPS or a single value, got {s:?}")),
        }
    }
}

impl fmt::Display for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.steps == 1 {
            write!(f, "{:?}", self.min)
        } else {
            write!(f, "{:?}:{:?}:{}", self.min, self.max, self.steps)
        }
    }
}
