use serde::{Deserialize, Serialize};

use crate::imaging::{BinaryMask, ImagingError};

/// Log arguments are floored at this value.
pub const LOG_FLOOR: f64 = 1e-7;

/// Per-pixel foreground probabilities.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbabilityMap {
    height: usize,
    width: usize,
    values: Vec<f64>,
}

impl ProbabilityMap {
    pub fn new(height: usize, width: usize, values: Vec<f64>) -> Result<Self, ImagingError> {
        if height == 0 || width == 0 || values.len() != height * width {
            return Err(ImagingError::InvalidParameter(format!(
                "{} values for a {height}x{width} probability map",
                values.len()
            )));
        }
        if let Some(v) = values.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(ImagingError::InvalidParameter(format!("probability {v} outside [0, 1]")));
        }
        Ok(Self { height, width, values })
    }

    /// 1.0 on set pixels, 0.0 elsewhere.
    pub fn from_mask(mask: &BinaryMask) -> Self {
        let (height, width) = mask.dims();
        let values = mask.bits().iter().map(|&b| if b { 1.0 } else { 0.0 }).collect();
        Self { height, width, values }
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.height, self.width)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

/// How the overlap score is normalised.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DiceMode {
    /// `2|X∩Y| / (|X| + |Y|)`.
    #[default]
    Standard,
    /// `2|X∩Y| / |X∪Y|`; not bounded by 1. Kept for auditing the literal formula.
    UnionDenominator,
}

/// Dice coefficient; two empty masks score 1.
pub fn dice(x: &BinaryMask, y: &BinaryMask) -> Result<f64, ImagingError> {
    dice_with(x, y, DiceMode::Standard)
}

pub fn dice_with(x: &BinaryMask, y: &BinaryMask, mode: DiceMode) -> Result<f64, ImagingError> {
    let inter = x.intersection_count(y)? as f64;
    let denom = match mode {
        DiceMode::Standard => (x.count() + y.count()) as f64,
        DiceMode::UnionDenominator => x.union_count(y)? as f64,
    };
    if denom == 0.0 {
        return Ok(1.0);
    }
    Ok(2.0 * inter / denom)
}

/// Binary cross-entropy term used by [`bce_dice_loss`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BceForm {
    /// `-1/2 · y · log ŷ` only.
    #[default]
    PositiveOnly,
    /// `-1/2 · (y · log ŷ + (1 - y) · log(1 - ŷ))`.
    Full,
}

/// Loss of one prediction: pixel-mean weighted BCE plus soft-Dice loss
/// `1 - 2Σyŷ / (Σy + Σŷ)`.
pub fn sample_loss(pred: &ProbabilityMap, target: &BinaryMask, form: BceForm) -> Result<f64, ImagingError> {
    if pred.dims() != target.dims() {
        return Err(ImagingError::DimensionMismatch { expected: target.dims(), actual: pred.dims() });
    }
    let n = pred.values.len() as f64;
    let mut bce = 0.0;
    let (mut inter, mut sum_y, mut sum_p) = (0.0, 0.0, 0.0);
    for (&p, &t) in pred.values.iter().zip(target.bits()) {
        let y = if t { 1.0 } else { 0.0 };
        bce -= y * p.max(LOG_FLOOR).ln();
        if form == BceForm::Full {
            bce -= (1.0 - y) * (1.0 - p).max(LOG_FLOOR).ln();
        }
        inter += y * p;
        sum_y += y;
        sum_p += p;
    }
    let bce = 0.5 * bce / n;
    let denom = sum_y + sum_p;
    let soft_dice = if denom > 0.0 { 2.0 * inter / denom } else { 0.0 };
    Ok(bce + 1.0 - soft_dice)
}

/// Mean of [`sample_loss`] over a batch.
pub fn bce_dice_loss(
    preds: &[ProbabilityMap],
    targets: &[BinaryMask],
    form: BceForm,
) -> Result<f64, ImagingError> {
    if preds.len() != targets.len() || preds.is_empty() {
        return Err(ImagingError::InvalidParameter(format!(
            "batch of {} predictions and {} targets",
            preds.len(),
            targets.len()
        )));
    }
    let mut total = 0.0;
    for (p, t) in preds.iter().zip(targets) {
        total += sample_loss(p, t, form)?;
    }
    Ok(total / preds.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn mask(bits: &[bool], w: usize) -> BinaryMask {
        BinaryMask::from_bits(bits.len() / w, w, bits.to_vec()).unwrap()
    }

    #[test]
    fn dice_trivial_cases() {
        let a = BinaryMask::from_ascii("##..\n##..");
        assert_eq!(dice(&a, &a).unwrap(), 1.0);
        let b = BinaryMask::from_ascii("..##\n..##");
        assert_eq!(dice(&a, &b).unwrap(), 0.0);
        let c = BinaryMask::from_ascii(".##.\n.##.");
        assert_eq!(dice(&a, &c).unwrap(), 0.5);
    }

    #[test]
    fn dice_empty_conventions() {
        let e = BinaryMask::empty(2, 2);
        assert_eq!(dice(&e, &e).unwrap(), 1.0);
        assert_eq!(dice(&e, &BinaryMask::full(2, 2)).unwrap(), 0.0);
        assert!(dice(&e, &BinaryMask::empty(2, 3)).is_err());
    }

    #[test]
    fn union_denominator_can_exceed_one() {
        let a = BinaryMask::from_ascii("##");
        assert_eq!(dice_with(&a, &a, DiceMode::UnionDenominator).unwrap(), 2.0);
    }

    #[test]
    fn perfect_prediction_has_zero_loss() {
        let t = mask(&[true, false, true, true, false, false], 3);
        let loss = bce_dice_loss(&[ProbabilityMap::from_mask(&t)], std::slice::from_ref(&t), BceForm::PositiveOnly).unwrap();
        assert!(loss.abs() < 1e-9, "{loss}");
        let loss = bce_dice_loss(&[ProbabilityMap::from_mask(&t)], &[t], BceForm::Full).unwrap();
        assert!(loss.abs() < 1e-9, "{loss}");
    }

    #[test]
    fn single_pixel_half_prediction() {
        let t = mask(&[true], 1);
        let p = ProbabilityMap::new(1, 1, vec![0.5]).unwrap();
        let loss = sample_loss(&p, &t, BceForm::PositiveOnly).unwrap();
        // direct evaluation: -1/2 ln 0.5 + 1 - 2(0.5)/(1 + 0.5)
        let expected = -0.5 * 0.5f64.ln() + 1.0 - 1.0 / 1.5;
        assert!((loss - expected).abs() < 1e-12);
        assert!((loss - 0.67990).abs() < 1e-4, "{loss}");
    }

    #[test]
    fn all_background_target_costs_one() {
        let t = BinaryMask::empty(2, 2);
        for v in [0.0, 0.3, 1.0] {
            let p = ProbabilityMap::new(2, 2, vec![v; 4]).unwrap();
            assert_eq!(sample_loss(&p, &t, BceForm::PositiveOnly).unwrap(), 1.0);
        }
    }

    #[test]
    fn rejects_out_of_range_and_mismatch() {
        assert!(ProbabilityMap::new(1, 2, vec![0.2, 1.5]).is_err());
        let p = ProbabilityMap::new(1, 2, vec![0.2, 0.5]).unwrap();
        assert!(sample_loss(&p, &BinaryMask::empty(2, 1), BceForm::Full).is_err());
        assert!(bce_dice_loss(&[], &[], BceForm::Full).is_err());
    }

    proptest! {
        #[test]
        fn dice_symmetric_and_bounded(bits in prop::collection::vec((any::<bool>(), any::<bool>()), 1..64)) {
            let x = mask(&bits.iter().map(|b| b.0).collect::<Vec<_>>(), 1);
            let y = mask(&bits.iter().map(|b| b.1).collect::<Vec<_>>(), 1);
            let d = dice(&x, &y).unwrap();
            prop_assert_eq!(d, dice(&y, &x).unwrap());
            prop_assert!((0.0..=1.0).contains(&d));
            if !x.is_empty() {
                prop_assert_eq!(dice(&x, &x).unwrap(), 1.0);
            }
        }

        #[test]
        fn loss_shrinks_as_prediction_approaches_target(
            bits in prop::collection::vec(any::<bool>(), 1..32),
            start in prop::collection::vec(0.0f64..=1.0, 32),
        ) {
            prop_assume!(bits.iter().any(|&b| b));
            let t = mask(&bits, 1);
            let n = bits.len();
            let mut prev = f64::INFINITY;
            for step in 0..=10 {
                // move every pixel a fraction of the way toward its target
                let alpha = step as f64 / 10.0;
                let vals: Vec<f64> = (0..n)
                    .map(|i| {
                        let y = if bits[i] { 1.0 } else { 0.0 };
                        start[i] + alpha * (y - start[i])
                    })
                    .collect();
                let loss = sample_loss(&ProbabilityMap::new(n, 1, vals).unwrap(), &t, BceForm::PositiveOnly).unwrap();
                prop_assert!(loss <= prev + 1e-12, "step {}: {} > {}", step, loss, prev);
                prev = loss;
            }
            prop_assert!(prev.abs() < 1e-9);
        }
    }
}
