use std::sync::Arc;

/// Knot times of a step path: either the regular grid `k·dt` or an explicit
/// strictly increasing list.
#[derive(Clone, Debug)]
pub enum Times {
    Regular { dt: f64, len: usize },
    Explicit(Arc<[f64]>),
}

impl Times {
    pub fn len(&self) -> usize {
        match self {
            Times::Regular { len, .. } => *len,
            Times::Explicit(t) => t.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[inline]
    pub fn get(&self, i: usize) -> f64 {
        match self {
            Times::Regular { dt, .. } => i as f64 * dt,
            Times::Explicit(t) => t[i],
        }
    }

    pub fn last(&self) -> Option<f64> {
        let n = self.len();
        (n > 0).then(|| self.get(n - 1))
    }

    /// Number of knots `≤ t`.
    pub fn count_le(&self, t: f64) -> usize {
        match self {
            Times::Explicit(ts) => ts.partition_point(|&s| s <= t),
            Times::Regular { dt, len } => {
                if *len == 0 || t < 0.0 {
                    return 0;
                }
                let guess = (t / dt).floor();
                let mut k = if guess >= *len as f64 { *len - 1 } else { guess as usize };
                while k + 1 < *len && (k + 1) as f64 * dt <= t {
                    k += 1;
                }
                while k > 0 && k as f64 * dt > t {
                    k -= 1;
                }
                if k as f64 * dt <= t {
                    k + 1
                } else {
                    0
                }
            }
        }
    }

    /// Number of knots `< t`.
    pub fn count_lt(&self, t: f64) -> usize {
        let n = self.count_le(t);
        if n > 0 && self.get(n - 1) == t {
            n - 1
        } else {
            n
        }
    }

    /// Index of the last knot `≤ t`.
    pub fn locate(&self, t: f64) -> Option<usize> {
        self.count_le(t).checked_sub(1)
    }

    pub fn to_vec(&self) -> Vec<f64> {
        (0..self.len()).map(|i| self.get(i)).collect()
    }

    pub fn truncated(&self, len: usize) -> Times {
        assert!(len <= self.len());
        match self {
            Times::Regular { dt, .. } => Times::Regular { dt: *dt, len },
            Times::Explicit(t) if len == t.len() => Times::Explicit(t.clone()),
            Times::Explicit(t) => Times::Explicit(t[..len].into()),
        }
    }

    /// Collapses `k·dt` lists back into the regular representation.
    pub fn from_vec(times: Vec<f64>) -> Times {
        if times.len() >= 2 {
            let dt = times[1];
            if dt > 0.0 && times.iter().enumerate().all(|(k, &t)| t == k as f64 * dt) {
                return Times::Regular { dt, len: times.len() };
            }
        }
        Times::Explicit(times.into())
    }

    pub fn bitwise_eq(&self, other: &Times) -> bool {
        self.len() == other.len()
            && (0..self.len()).all(|i| self.get(i).to_bits() == other.get(i).to_bits())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn regular_and_explicit_locate_agree() {
        let dt = 1e-3;
        let reg = Times::Regular { dt, len: 2001 };
        let exp = Times::Explicit(reg.to_vec().into());
        for i in 0..5000 {
            let t = -0.5 + i as f64 * 7.77e-4;
            assert_eq!(reg.count_le(t), exp.count_le(t), "t = {t}");
            assert_eq!(reg.count_lt(t), exp.count_lt(t), "t = {t}");
        }
        for k in 0..2001 {
            let t = k as f64 * dt;
            assert_eq!(reg.locate(t), Some(k));
            assert_eq!(reg.count_lt(t), k);
        }
    }

    #[test]
    fn from_vec_recovers_grid() {
        let v: Vec<f64> = (0..10).map(|k| k as f64 * 0.1).collect();
        assert!(matches!(Times::from_vec(v), Times::Regular { len: 10, .. }));
        assert!(matches!(Times::from_vec(vec![0.0, 0.5, 0.7]), Times::Explicit(_)));
    }
}
