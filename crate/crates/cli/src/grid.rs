use std::fmt;
use std::str::FromStr;

use serde::Serialize;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Scale {
    Linear,
    Log,
}

/// `start:stop:count[:log]`. A single number is a one-point grid.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GridSpec {
    pub start: f64,
    pub stop: f64,
    pub count: usize,
    pub scale: Scale,
}

impl GridSpec {
    pub fn points(&self) -> Vec<f64> {
        if self.count == 1 {
            return vec![self.start];
        }
        let last = (self.count - 1) as f64;
        (0..self.count)
            .map(|i| {
                if i == self.count - 1 {
                    return self.stop;
                }
                let t = i as f64 / last;
                match self.scale {
                    Scale::Linear => self.start + (self.stop - self.start) * t,
                    Scale::Log => {
                        (self.start.ln() + (self.stop.ln() - self.start.ln()) * t).exp()
                    }
                }
            })
            .collect()
    }
}

impl FromStr for GridSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Vec<&str> = s.split(':').collect();
        let num = |p: &str| -> Result<f64, String> {
            let v: f64 = p
                .trim()
                .parse()
                .map_err(|_| format!("`{p}` is not a number"))?;
            if v.is_finite() {
                Ok(v)
            } else {
                Err(format!("`{p}` is not finite"))
            }
        };
        if parts.len() == 1 {
            let v = num(parts[0])?;
            if v < 0.0 {
                return Err(format!("grid value {v} must be >= 0"));
            }
            return Ok(GridSpec {
                start: v,
                stop: v,
                count: 1,
                scale: Scale::Linear,
            });
        }
        if !(3..=4).contains(&parts.len()) {
            return Err(format!("expected start:stop:count[:log], got `{s}`"));
        }
        let start = num(parts[0])?;
        let stop = num(parts[1])?;
        let count: usize = parts[2]
            .trim()
            .parse()
            .map_err(|_| format!("count `{}` is not a positive integer", parts[2]))?;
        let scale = match parts.get(3).map(|p| p.trim()) {
            None | Some("lin") | Some("linear") => Scale::Linear,
            Some("log") => Scale::Log,
            Some(other) => return Err(format!("unknown grid scale `{other}`")),
        };
        if count == 0 {
            return Err("grid count must be >= 1".into());
        }
        if start < 0.0 {
            return Err(format!("grid start {start} must be >= 0"));
        }
        if count > 1 && !(start < stop) {
            return Err(format!("grid start {start} must be below stop {stop}"));
        }
        if scale == Scale::Log && !(start > 0.0) {
            return Err("log grid needs start > 0".into());
        }
        Ok(GridSpec {
            start,
            stop,
            count,
            scale,
        })
    }
}

impl fmt::Display for GridSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.start, self.stop, self.count)?;
        if self.scale == Scale::Log {
            write!(f, ":log")?;
        }
        Ok(())
    }
}
