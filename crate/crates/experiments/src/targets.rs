//! Closed-form regression targets and grayscale image targets.

use std::fmt;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub enum Target {
    /// `x²`
    Square,
    /// `x²`, plus 1 for `x ≥ 0`.
    JumpSquare,
    /// `|x|`
    Abs,
    /// `exp(2x + y²)`
    Exp2d,
    /// `exp(2x + y²)`, plus 1 for `x ≥ 0`.
    JumpExp2d,
    Image(ImageTarget),
}

/// Gray levels in `[0, 1]` indexed by 1-based pixel coordinates `(x1, x2)`.
#[derive(Clone, Debug, PartialEq)]
pub struct ImageTarget {
    pub path: PathBuf,
    pub width: usize,
    pub height: usize,
    gray: Vec<f64>,
}

impl ImageTarget {
    pub fn load(path: &Path) -> Result<Self> {
        let img = image::open(path)?.to_luma8();
        let (w, h) = img.dimensions();
        Ok(ImageTarget {
            path: path.to_path_buf(),
            width: w as usize,
            height: h as usize,
            gray: img.pixels().map(|p| p.0[0] as f64 / 255.0).collect(),
        })
    }

    /// Nearest-pixel lookup, clamped to the image.
    pub fn value(&self, x1: f64, x2: f64) -> f64 {
        let c = (x1.round() as isize - 1).clamp(0, self.width as isize - 1) as usize;
        let r = (x2.round() as isize - 1).clamp(0, self.height as isize - 1) as usize;
        self.gray[r * self.width + c]
    }
}

impl Target {
    pub fn parse(s: &str) -> Result<Self> {
        if let Some(path) = s.strip_prefix("image:") {
            return Ok(Target::Image(ImageTarget::load(Path::new(path))?));
        }
        match s {
            "square" => Ok(Target::Square),
            "jump_square" => Ok(Target::JumpSquare),
            "abs" => Ok(Target::Abs),
            "exp2d" => Ok(Target::Exp2d),
            "jump_exp2d" => Ok(Target::JumpExp2d),
            _ => Err(Error::Config(format!("unknown target `{s}`"))),
        }
    }

    pub fn input_dim(&self) -> usize {
        match self {
            Target::Square | Target::JumpSquare | Target::Abs => 1,
            _ => 2,
        }
    }

    pub fn eval(&self, p: &[f64]) -> f64 {
        let jump = |v: f64| if v >= 0.0 { 1.0 } else { 0.0 };
        match self {
            Target::Square => p[0] * p[0],
            Target::JumpSquare => p[0] * p[0] + jump(p[0]),
            Target::Abs => p[0].abs(),
            Target::Exp2d => (2.0 * p[0] + p[1] * p[1]).exp(),
            Target::JumpExp2d => (2.0 * p[0] + p[1] * p[1]).exp() + jump(p[0]),
            Target::Image(img) => img.value(p[0], p[1]),
        }
    }

    /// Values at point-major coordinates of dimension [`Target::input_dim`].
    pub fn eval_all(&self, coords: &[f64]) -> Vec<f64> {
        coords
            .chunks(self.input_dim())
            .map(|p| self.eval(p))
            .collect()
    }

    /// Pixel box `[1, W] × [1, H]` for image targets.
    pub fn natural_box(&self) -> Option<(Vec<f64>, Vec<f64>)> {
        match self {
            Target::Image(img) => Some((vec![1.0, 1.0], vec![img.width as f64, img.height as f64])),
            _ => None,
        }
    }
}

impl fmt::Display for Target {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Target::Square => f.write_str("square"),
            Target::JumpSquare => f.write_str("jump_square"),
            Target::Abs => f.write_str("abs"),
            Target::Exp2d => f.write_str("exp2d"),
            Target::JumpExp2d => f.write_str("jump_exp2d"),
            Target::Image(img) => write!(f, "image:{}", img.path.display()),
        }
    }
}
