//! EEGNet parameter arithmetic and curve output.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::Montage;
use crate::selectors::CurvePoint;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CountMode {
    /// Batch-norm scale and shift only.
    #[default]
    TrainableOnly,
    /// Scale, shift, running mean and running variance.
    AllBatchnorm,
}

/// EEGNet geometry. Defaults: 22 channels, 1125 samples, 4 classes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EegnetArch {
    pub c: u64,
    pub t: u64,
    pub f1: u64,
    pub d: u64,
    pub f2: u64,
    pub kern_len: u64,
    pub sep_kern: u64,
    pub pool1: u64,
    pub pool2: u64,
    pub n_classes: u64,
    pub count_mode: CountMode,
}

impl Default for EegnetArch {
    fn default() -> Self {
        EegnetArch {
            c: 22,
            t: 1125,
            f1: 8,
            d: 2,
            f2: 16,
            kern_len: 64,
            sep_kern: 16,
            pool1: 4,
            pool2: 8,
            n_classes: 4,
            count_mode: CountMode::TrainableOnly,
        }
    }
}

impl EegnetArch {
    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("c", self.c),
            ("t", self.t),
            ("f1", self.f1),
            ("d", self.d),
            ("f2", self.f2),
            ("kern_len", self.kern_len),
            ("sep_kern", self.sep_kern),
            ("pool1", self.pool1),
            ("pool2", self.pool2),
            ("n_classes", self.n_classes),
        ];
        if let Some((name, _)) = fields.iter().find(|(_, v)| *v == 0) {
            return Err(Error::InvalidConfig(format!("{name} must be at least 1")));
        }
        if self.pool1.saturating_mul(self.pool2) > self.t {
            return Err(Error::InvalidConfig(format!(
                "pool1·pool2 = {} exceeds t = {}",
                self.pool1 * self.pool2,
                self.t
            )));
        }
        Ok(())
    }
}

/// Parameter count of the temporal conv, depthwise spatial conv, separable
/// conv, the three batch norms and the dense classifier.
pub fn eegnet_param_count(arch: &EegnetArch) -> Result<u64> {
    arch.validate()?;
    let bn = |m: u64| match arch.count_mode {
        CountMode::TrainableOnly => 2 * m,
        CountMode::AllBatchnorm => 4 * m,
    };
    let EegnetArch {
        c,
        t,
        f1,
        d,
        f2,
        kern_len,
        sep_kern,
        pool1,
        pool2,
        n_classes,
        ..
    } = *arch;
    let temporal = f1 * kern_len + bn(f1);
    let spatial = c * f1 * d + bn(f1 * d);
    let separable = sep_kern * f1 * d + f1 * d * f2 + bn(f2);
    let dense = f2 * (t / pool1 / pool2) * n_classes + n_classes;
    Ok(temporal + spatial + separable + dense)
}

/// `n / 1000` rounded half-up to two decimals, e.g. `2625 → "2.63k"`.
pub fn format_k(n: u64) -> String {
    let hundredths = (n * 100 + 500) / 1000;
    format!("{}.{:02}k", hundredths / 100, hundredths % 100)
}

pub const CURVE_HEADER: &str = "size,accuracy,subset";

/// Curve rows as CSV with LF endings; the subset column holds channel names
/// joined by `+`.
pub fn curve_csv(curve: &[CurvePoint], montage: &Montage) -> String {
    let mut out = String::from(CURVE_HEADER);
    out.push('\n');
    for p in curve {
        let names = montage.names_of(&p.subset).join("+");
        writeln!(out, "{},{:.4},{}", p.size, p.accuracy, names).expect("write to String");
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::ChannelSubset;

    #[test]
    fn default_count_by_hand() {
        // 512 + 16 | 352 + 32 | 256 + 256 + 32 | 16·35·4 + 4
        let expected = (8 * 64 + 2 * 8) + (22 * 8 * 2 + 2 * 16) + (16 * 16 + 16 * 16 + 2 * 16) + (16 * 35 * 4 + 4);
        assert_eq!(expected, 3700);
        assert_eq!(eegnet_param_count(&EegnetArch::default()).unwrap(), expected);
    }

    #[test]
    fn channel_slope_and_bn_mode() {
        let at = |c| {
            eegnet_param_count(&EegnetArch {
                c,
                ..EegnetArch::default()
            })
            .unwrap()
        };
        assert_eq!(at(22) - at(14), 128);
        for c in 1..40 {
            assert_eq!(at(c + 1) - at(c), 16);
        }
        let all = eegnet_param_count(&EegnetArch {
            count_mode: CountMode::AllBatchnorm,
            ..EegnetArch::default()
        })
        .unwrap();
        assert_eq!(all - at(22), 2 * (8 + 16 + 16));
    }

    #[test]
    fn invalid_arch() {
        let a = EegnetArch {
            t: 31,
            ..EegnetArch::default()
        };
        assert!(eegnet_param_count(&a).is_err());
        let z = EegnetArch {
            f2: 0,
            ..EegnetArch::default()
        };
        assert!(eegnet_param_count(&z).is_err());
    }

    #[test]
    fn k_format() {
        assert_eq!(format_k(2625), "2.63k");
        assert_eq!(format_k(2624), "2.62k");
        assert_eq!(format_k(2500), "2.50k");
        assert_eq!(format_k(3700), "3.70k");
        assert_eq!(format_k(4), "0.00k");
        assert_eq!(format_k(995), "1.00k");
    }

    #[test]
    fn curve_rows() {
        let m = Montage::bci_iv_2a();
        let curve = vec![
            CurvePoint {
                size: 1,
                accuracy: 0.5,
                subset: ChannelSubset::canonicalize(&[9], 22).unwrap(),
            },
            CurvePoint {
                size: 2,
                accuracy: 0.123456,
                subset: ChannelSubset::canonicalize(&[7, 9], 22).unwrap(),
            },
        ];
        assert_eq!(curve_csv(&curve, &m), "size,accuracy,subset\n1,0.5000,Cz\n2,0.1235,C3+Cz\n");
    }
}
