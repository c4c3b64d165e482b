//! Link budget: pathloss with log-normal shadowing, open-loop uplink power,
//! CDMA SINR and spectral efficiency for every (BS, user) pair.

use std::fmt::Write as _;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::topology::Topology;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Tier {
    Macro,
    Pico,
}

/// Log-distance pathloss `intercept + slope * log10(d_km)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathlossModel {
    pub intercept_db: f64,
    pub slope_db: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RadioParams {
    /// Spreading gain applied to the desired signal.
    pub processing_gain: f64,
    pub target_snr_db: f64,
    pub max_tx_power_dbm: f64,
    pub circuit_power_mw: f64,
    pub noise_density_dbm_hz: f64,
    pub bandwidth_hz: f64,
    pub shadowing_std_db: f64,
    pub macro_pl: PathlossModel,
    pub pico_pl: PathlossModel,
    /// Whether the open-loop power rule sees the shadowed loss or only the distance loss.
    pub power_control_uses_shadowing: bool,
}

impl Default for RadioParams {
    fn default() -> Self {
        Self {
            processing_gain: 128.0,
            target_snr_db: 10.0,
            max_tx_power_dbm: 23.0,
            circuit_power_mw: 100.0,
            noise_density_dbm_hz: -174.0,
            bandwidth_hz: 10e6,
            shadowing_std_db: 8.0,
            macro_pl: PathlossModel {
                intercept_db: 128.1,
                slope_db: 37.6,
            },
            pico_pl: PathlossModel {
                intercept_db: 140.7,
                slope_db: 36.7,
            },
            power_control_uses_shadowing: true,
        }
    }
}

impl RadioParams {
    pub fn validate(&self) -> Result<()> {
        let check = |ok: bool, msg: &str| {
            if ok {
                Ok(())
            } else {
                Err(Error::InvalidConfig(msg.to_string()))
            }
        };
        check(self.processing_gain >= 1.0, "processing_gain must be >= 1")?;
        check(
            self.bandwidth_hz > 0.0 && self.bandwidth_hz.is_finite(),
            "bandwidth must be positive",
        )?;
        check(self.shadowing_std_db >= 0.0, "shadowing_std must be >= 0")?;
        check(self.circuit_power_mw >= 0.0, "circuit_power must be >= 0")?;
        check(
            [
                self.target_snr_db,
                self.max_tx_power_dbm,
                self.noise_density_dbm_hz,
                self.macro_pl.intercept_db,
                self.macro_pl.slope_db,
                self.pico_pl.intercept_db,
                self.pico_pl.slope_db,
            ]
            .iter()
            .all(|v| v.is_finite()),
            "radio parameters must be finite",
        )
    }

    /// Thermal noise over the configured bandwidth, in mW.
    pub fn noise_mw(&self) -> f64 {
        db_to_linear(self.noise_density_dbm_hz + 10.0 * self.bandwidth_hz.log10())
    }

    pub fn max_tx_power_mw(&self) -> f64 {
        db_to_linear(self.max_tx_power_dbm)
    }

    pub fn model(&self, tier: Tier) -> PathlossModel {
        match tier {
            Tier::Macro => self.macro_pl,
            Tier::Pico => self.pico_pl,
        }
    }

    /// Canonical `key=value` rendering; the basis for [`RadioParams::hash_hex`].
    pub fn to_kv(&self) -> String {
        format!(
            "processing_gain={}\ntarget_snr_db={}\nmax_tx_power_dbm={}\ncircuit_power_mw={}\n\
             noise_density_dbm_hz={}\nbandwidth_hz={}\nshadowing_std_db={}\n\
             macro_pl_intercept={}\nmacro_pl_slope={}\npico_pl_intercept={}\npico_pl_slope={}\n\
             power_control_uses_shadowing={}\n",
            self.processing_gain,
            self.target_snr_db,
            self.max_tx_power_dbm,
            self.circuit_power_mw,
            self.noise_density_dbm_hz,
            self.bandwidth_hz,
            self.shadowing_std_db,
            self.macro_pl.intercept_db,
            self.macro_pl.slope_db,
            self.pico_pl.intercept_db,
            self.pico_pl.slope_db,
            self.power_control_uses_shadowing,
        )
    }

    pub fn hash_hex(&self) -> String {
        short_hash(self.to_kv().as_bytes())
    }
}

pub fn short_hash(bytes: &[u8]) -> String {
    let digest = Sha256::digest(bytes);
    digest[..8].iter().map(|b| format!("{b:02x}")).collect()
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn pathloss_db(tier: Tier, distance_km: f64, params: &RadioParams) -> Result<f64> {
    if !(distance_km > 0.0) {
        return Err(Error::NonPositiveDistance(distance_km));
    }
    let m = params.model(tier);
    Ok(m.intercept_db + m.slope_db * distance_km.log10())
}

/// `min(Γ σ² / 10^(-l/10), p_max)` in mW.
pub fn open_loop_power(pathloss_db: f64, noise_mw: f64, params: &RadioParams) -> f64 {
    debug_assert!(noise_mw > 0.0);
    let desired = db_to_linear(params.target_snr_db) * noise_mw / db_to_linear(-pathloss_db);
    desired.min(params.max_tx_power_mw())
}

/// Dense row-major N x K matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Self {
        let cols = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|r| r.len() == cols), "ragged matrix");
        Self {
            rows: rows.len(),
            cols,
            data: rows.concat(),
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: f64) {
        self.data[r * self.cols + c] = v;
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Matrix {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn values(&self) -> &[f64] {
        &self.data
    }
}

/// Per-link quantities for N BSs (rows) and K users (columns).
#[derive(Debug, Clone, PartialEq)]
pub struct LinkTable {
    pub pathloss_db: Matrix,
    pub gain: Matrix,
    pub tx_power_mw: Matrix,
    pub sinr: Matrix,
    /// Spectral efficiency in bits/s/Hz.
    pub rate: Matrix,
    pub noise_mw: Vec<f64>,
    pub params_hash: String,
}

impl LinkTable {
    pub fn num_bs(&self) -> usize {
        self.rate.rows()
    }

    pub fn num_users(&self) -> usize {
        self.rate.cols()
    }

    /// A table defined only by its rates and powers, for solver-level work
    /// that never touches geometry. SINR is back-computed from the rate;
    /// gain and pathloss are left at unity / 0 dB.
    pub fn from_rate_power(rate: Matrix, tx_power_mw: Matrix) -> LinkTable {
        assert_eq!(rate.rows(), tx_power_mw.rows());
        assert_eq!(rate.cols(), tx_power_mw.cols());
        let (n, k) = (rate.rows(), rate.cols());
        LinkTable {
            pathloss_db: Matrix::zeros(n, k),
            gain: Matrix::zeros(n, k).map(|_| 1.0),
            sinr: rate.map(|r| r.exp2() - 1.0),
            rate,
            tx_power_mw,
            noise_mw: vec![1.0; n],
            params_hash: "synthetic".into(),
        }
    }

    /// Plain-text dump: a header line, then one tab-separated row per BS per matrix.
    pub fn to_text(&self) -> String {
        let mut out = format!(
            "# linktable N={} K={} params={}\n",
            self.num_bs(),
            self.num_users(),
            self.params_hash
        );
        let mut row_line = |name: &str, n: usize, row: &[f64]| {
            let _ = write!(out, "{name}\t{n}");
            for v in row {
                let _ = write!(out, "\t{v}");
            }
            out.push('\n');
        };
        for (name, m) in [
            ("pathloss_db", &self.pathloss_db),
            ("gain", &self.gain),
            ("tx_power_mw", &self.tx_power_mw),
            ("sinr", &self.sinr),
            ("rate", &self.rate),
        ] {
            for n in 0..m.rows() {
                row_line(name, n, m.row(n));
            }
        }
        for (n, v) in self.noise_mw.iter().enumerate() {
            row_line("noise_mw", n, std::slice::from_ref(v));
        }
        out
    }
}

/// SplitMix64 finaliser; used to give every link its own shadowing stream.
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

fn shadowing_db(seed: u64, n: usize, k: usize, std_db: f64) -> f64 {
    if std_db == 0.0 {
        return 0.0;
    }
    let stream = mix64(mix64(seed ^ mix64(n as u64)) ^ (k as u64));
    let mut rng = ChaCha8Rng::seed_from_u64(stream);
    Normal::new(0.0, std_db)
        .expect("shadowing std validated non-negative")
        .sample(&mut rng)
}

pub fn build_link_table(topology: &Topology, params: &RadioParams, seed: u64) -> Result<LinkTable> {
    params.validate()?;
    let (n_bs, k_users) = (topology.num_bs(), topology.num_users());
    if n_bs == 0 || k_users == 0 {
        return Err(Error::InvalidConfig(
            "link table needs at least one BS and one user".into(),
        ));
    }
    let noise = params.noise_mw();
    let mut pathloss = Matrix::zeros(n_bs, k_users);
    let mut gain = Matrix::zeros(n_bs, k_users);
    let mut power = Matrix::zeros(n_bs, k_users);
    for n in 0..n_bs {
        let tier = if topology.is_macro(n) { Tier::Macro } else { Tier::Pico };
        let bs = topology.bs_position(n);
        for (k, &user) in topology.user_positions.iter().enumerate() {
            let distance_loss = pathloss_db(tier, topology.distance(bs, user) / 1000.0, params)?;
            let loss = distance_loss + shadowing_db(seed, n, k, params.shadowing_std_db);
            pathloss.set(n, k, loss);
            gain.set(n, k, db_to_linear(-loss));
            let pc_loss = if params.power_control_uses_shadowing {
                loss
            } else {
                distance_loss
            };
            power.set(n, k, open_loop_power(pc_loss, noise, params));
        }
    }

    let mut sinr = Matrix::zeros(n_bs, k_users);
    for n in 0..n_bs {
        let received: Vec<f64> = (0..k_users).map(|k| power.get(n, k) * gain.get(n, k)).collect();
        for k in 0..k_users {
            // interference from every other user at its own open-loop power toward n
            let interference: f64 = received
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != k)
                .map(|(_, &v)| v)
                .sum();
            sinr.set(
                n,
                k,
                params.processing_gain * power.get(n, k) * gain.get(n, k) / (interference + noise),
            );
        }
    }
    let rate = sinr.map(|s| (1.0 + s).log2());

    Ok(LinkTable {
        pathloss_db: pathloss,
        gain,
        tx_power_mw: power,
        sinr,
        rate,
        noise_mw: vec![noise; n_bs],
        params_hash: params.hash_hex(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::topology::{generate_topology, DeploymentConfig, Point, RegionShape};

    fn topo_with(users: Vec<Point>, pbs: Vec<Point>) -> Topology {
        Topology {
            inter_site_distance: 1000.0,
            region_shape: RegionShape::Hexagon,
            wrap_around: false,
            mbs_positions: vec![Point::ORIGIN],
            pbs_cell: vec![0; pbs.len()],
            pbs_positions: pbs,
            user_cell: vec![0; users.len()],
            user_positions: users,
        }
    }

    #[test]
    fn pathloss_reference_points() {
        let p = RadioParams::default();
        assert_eq!(pathloss_db(Tier::Macro, 1.0, &p).unwrap(), 128.1);
        assert_eq!(pathloss_db(Tier::Pico, 1.0, &p).unwrap(), 140.7);
        assert!((pathloss_db(Tier::Macro, 0.1, &p).unwrap() - 90.5).abs() < 1e-12);
        assert!(matches!(
            pathloss_db(Tier::Macro, 0.0, &p),
            Err(Error::NonPositiveDistance(_))
        ));
        assert!(pathloss_db(Tier::Pico, -1.0, &p).is_err());
    }

    #[test]
    fn noise_over_ten_megahertz() {
        let p = RadioParams::default();
        assert!((p.noise_mw() / 10f64.powf(-10.4) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn open_loop_power_below_cap() {
        let p = RadioParams::default();
        let noise = 10f64.powf(-10.4);
        let got = open_loop_power(90.5, noise, &p);
        let want = 10f64.powf((10.0 - 104.0 + 90.5) / 10.0);
        assert!((got / want - 1.0).abs() < 1e-12);
        assert!((got - 0.4467).abs() < 1e-4);
    }

    #[test]
    fn open_loop_power_hits_cap() {
        let p = RadioParams::default();
        let noise = 10f64.powf(-10.4);
        let got = open_loop_power(130.0, noise, &p);
        assert!((got / 10f64.powf(2.3) - 1.0).abs() < 1e-9);
        assert!((got - 199.526).abs() < 1e-3);
    }

    #[test]
    fn open_loop_power_monotone_and_capped() {
        let p = RadioParams::default();
        let noise = p.noise_mw();
        let mut prev = 0.0;
        for i in 0..400 {
            let l = 60.0 + 0.25 * i as f64;
            let v = open_loop_power(l, noise, &p);
            assert!(v >= prev);
            assert!(v <= p.max_tx_power_mw());
            prev = v;
        }
    }

    #[test]
    fn single_user_sees_no_interference() {
        let params = RadioParams::default();
        let topo = topo_with(vec![Point::new(120.0, 40.0)], vec![Point::new(-200.0, 100.0)]);
        let t = build_link_table(&topo, &params, 9).unwrap();
        for n in 0..2 {
            let expected = 128.0 * t.tx_power_mw.get(n, 0) * t.gain.get(n, 0) / t.noise_mw[n];
            assert_eq!(t.sinr.get(n, 0), expected);
        }
    }

    #[test]
    fn log2_identity_points() {
        let t = LinkTable::from_rate_power(
            Matrix::from_rows(&[vec![1.0, 2.0]]),
            Matrix::from_rows(&[vec![1.0, 1.0]]),
        );
        assert_eq!(t.sinr.get(0, 0), 1.0);
        assert_eq!(t.sinr.get(0, 1), 3.0);
        assert_eq!((1.0f64 + 3.0).log2(), 2.0);
    }

    #[test]
    fn equidistant_users_are_symmetric() {
        let params = RadioParams {
            shadowing_std_db: 0.0,
            ..Default::default()
        };
        let topo = topo_with(vec![Point::new(300.0, 0.0), Point::new(-300.0, 0.0)], vec![]);
        let t = build_link_table(&topo, &params, 0).unwrap();
        let (p, g) = (t.tx_power_mw.get(0, 0), t.gain.get(0, 0));
        assert_eq!(p, t.tx_power_mw.get(0, 1));
        assert_eq!(g, t.gain.get(0, 1));
        let expected = 128.0 * p * g / (p * g + t.noise_mw[0]);
        assert!((t.sinr.get(0, 0) / expected - 1.0).abs() < 1e-14);
        assert_eq!(t.sinr.get(0, 0), t.sinr.get(0, 1));
    }

    #[test]
    fn zero_shadowing_ignores_seed() {
        let params = RadioParams {
            shadowing_std_db: 0.0,
            ..Default::default()
        };
        let topo = generate_topology(&DeploymentConfig::default()).unwrap();
        let a = build_link_table(&topo, &params, 1).unwrap();
        let b = build_link_table(&topo, &params, 2).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn doubling_processing_gain_doubles_sinr() {
        let topo = generate_topology(&DeploymentConfig::default()).unwrap();
        let base = RadioParams::default();
        let doubled = RadioParams {
            processing_gain: 256.0,
            ..base.clone()
        };
        let a = build_link_table(&topo, &base, 5).unwrap();
        let b = build_link_table(&topo, &doubled, 5).unwrap();
        for (x, y) in a.sinr.values().iter().zip(b.sinr.values()) {
            assert_eq!(2.0 * x, *y);
        }
    }

    #[test]
    fn power_control_switch_changes_only_power() {
        let topo = generate_topology(&DeploymentConfig::default()).unwrap();
        let with = RadioParams::default();
        let without = RadioParams {
            power_control_uses_shadowing: false,
            ..Default::default()
        };
        let a = build_link_table(&topo, &with, 3).unwrap();
        let b = build_link_table(&topo, &without, 3).unwrap();
        assert_eq!(a.gain, b.gain);
        assert_ne!(a.tx_power_mw, b.tx_power_mw);
        // shadowing-free loss: power depends only on distance
        let noise = with.noise_mw();
        let d = topo.user_positions[0].dist(Point::ORIGIN) / 1000.0;
        let l = pathloss_db(Tier::Macro, d, &with).unwrap();
        assert_eq!(b.tx_power_mw.get(0, 0), open_loop_power(l, noise, &with));
    }

    #[test]
    fn rejects_empty_topology() {
        let topo = topo_with(vec![], vec![]);
        assert!(build_link_table(&topo, &RadioParams::default(), 0).is_err());
    }

    #[test]
    fn invalid_params_rejected() {
        let topo = topo_with(vec![Point::new(100.0, 0.0)], vec![]);
        let bad = RadioParams {
            processing_gain: 0.5,
            ..Default::default()
        };
        assert!(matches!(
            build_link_table(&topo, &bad, 0),
            Err(Error::InvalidConfig(_))
        ));
    }

    #[test]
    fn dump_has_one_row_per_bs_per_matrix() {
        let topo = generate_topology(&DeploymentConfig {
            pbs_per_macrocell: 2,
            users_per_macrocell: 3,
            ..Default::default()
        })
        .unwrap();
        let t = build_link_table(&topo, &RadioParams::default(), 0).unwrap();
        let text = t.to_text();
        assert!(text.starts_with("# linktable N=3 K=3 params="));
        assert_eq!(text.lines().count(), 1 + 5 * 3 + 3);
        assert_eq!(text.lines().filter(|l| l.starts_with("rate\t")).count(), 3);
    }
}
