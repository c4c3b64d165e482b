//! Two-tier network layouts: MBSs on a hexagonal grid, PBSs and users
//! scattered uniformly inside each macrocell by rejection sampling.

use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Rejection-sampling attempts allowed per placed point.
pub const ATTEMPTS_PER_POINT: usize = 10_000;

const SQRT3: f64 = 1.732_050_807_568_877_2;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const ORIGIN: Point = Point { x: 0.0, y: 0.0 };

    pub fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn dist(self, other: Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RegionShape {
    Hexagon,
    Disk,
}

impl std::str::FromStr for RegionShape {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "hexagon" | "hex" => Ok(RegionShape::Hexagon),
            "disk" => Ok(RegionShape::Disk),
            other => Err(format!("unknown region shape `{other}`")),
        }
    }
}

impl std::fmt::Display for RegionShape {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            RegionShape::Hexagon => "hexagon",
            RegionShape::Disk => "disk",
        })
    }
}

/// Deployment geometry. All distances are in meters.
#[derive(Debug, Clone, PartialEq)]
pub struct DeploymentConfig {
    pub num_macrocells: usize,
    pub pbs_per_macrocell: usize,
    pub users_per_macrocell: usize,
    pub inter_site_distance: f64,
    pub min_pbs_pbs: f64,
    pub min_pbs_mbs: f64,
    pub min_user_mbs: f64,
    pub min_user_pbs: f64,
    pub seed: u64,
    pub region_shape: RegionShape,
    /// Measure distances on a wrapped 7-cell cluster. Requires `num_macrocells == 7`.
    pub wrap_around: bool,
}

impl Default for DeploymentConfig {
    fn default() -> Self {
        Self {
            num_macrocells: 1,
            pbs_per_macrocell: 4,
            users_per_macrocell: 30,
            inter_site_distance: 1000.0,
            min_pbs_pbs: 40.0,
            min_pbs_mbs: 75.0,
            min_user_mbs: 35.0,
            min_user_pbs: 10.0,
            seed: 0,
            region_shape: RegionShape::Hexagon,
            wrap_around: false,
        }
    }
}

impl DeploymentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.num_macrocells == 0 {
            return Err(Error::InvalidConfig("num_macrocells must be at least 1".into()));
        }
        let distances = [
            ("inter_site_distance", self.inter_site_distance),
            ("min_pbs_pbs", self.min_pbs_pbs),
            ("min_pbs_mbs", self.min_pbs_mbs),
            ("min_user_mbs", self.min_user_mbs),
            ("min_user_pbs", self.min_user_pbs),
        ];
        for (name, d) in distances {
            if !(d.is_finite() && d > 0.0) {
                return Err(Error::InvalidConfig(format!("{name} must be positive, got {d}")));
            }
        }
        if self.wrap_around && self.num_macrocells != 7 {
            return Err(Error::InvalidConfig(
                "wrap_around needs exactly 7 macrocells (one ring)".into(),
            ));
        }
        Ok(())
    }

    pub fn circumradius(&self) -> f64 {
        self.inter_site_distance / SQRT3
    }
}

/// Planar area served by one macrocell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MacrocellRegion {
    pub center: Point,
    pub circumradius: f64,
    pub shape: RegionShape,
}

impl MacrocellRegion {
    /// Flat-topped hexagon (a vertex on the +x axis) or disk. The boundary is inclusive.
    pub fn contains(&self, p: Point) -> bool {
        let dx = (p.x - self.center.x).abs();
        let dy = (p.y - self.center.y).abs();
        let r = self.circumradius;
        match self.shape {
            RegionShape::Disk => dx.hypot(dy) <= r,
            RegionShape::Hexagon => dy <= 0.5 * SQRT3 * r && SQRT3 * dx + dy <= SQRT3 * r,
        }
    }

    fn sample<R: Rng>(&self, rng: &mut R) -> Point {
        let r = self.circumradius;
        loop {
            let p = Point::new(
                self.center.x + rng.random_range(-r..=r),
                self.center.y + rng.random_range(-r..=r),
            );
            if self.contains(p) {
                return p;
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NodeKind {
    Mbs,
    Pbs,
    User,
}

impl NodeKind {
    pub fn label(self) -> &'static str {
        match self {
            NodeKind::Mbs => "MBS",
            NodeKind::Pbs => "PBS",
            NodeKind::User => "USER",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Topology {
    pub inter_site_distance: f64,
    pub region_shape: RegionShape,
    pub wrap_around: bool,
    pub mbs_positions: Vec<Point>,
    pub pbs_positions: Vec<Point>,
    pub user_positions: Vec<Point>,
    /// Owning macrocell of each PBS.
    pub pbs_cell: Vec<usize>,
    /// Owning macrocell of each user.
    pub user_cell: Vec<usize>,
}

impl Topology {
    pub fn num_macrocells(&self) -> usize {
        self.mbs_positions.len()
    }

    /// Total BS count; MBSs occupy the first indices, PBSs follow.
    pub fn num_bs(&self) -> usize {
        self.mbs_positions.len() + self.pbs_positions.len()
    }

    pub fn num_users(&self) -> usize {
        self.user_positions.len()
    }

    pub fn bs_position(&self, n: usize) -> Point {
        let m = self.mbs_positions.len();
        if n < m {
            self.mbs_positions[n]
        } else {
            self.pbs_positions[n - m]
        }
    }

    pub fn is_macro(&self, n: usize) -> bool {
        n < self.mbs_positions.len()
    }

    /// Euclidean distance in meters, or the shortest image distance when
    /// the 7-cell cluster is wrapped.
    pub fn distance(&self, a: Point, b: Point) -> f64 {
        let direct = a.dist(b);
        if !self.wrap_around {
            return direct;
        }
        cluster_shifts(self.inter_site_distance)
            .iter()
            .map(|s| Point::new(b.x + s.x, b.y + s.y).dist(a))
            .fold(direct, f64::min)
    }

    /// Tab-separated replay format: `kind index x y owning_cell`, one node per line.
    pub fn to_text(&self) -> String {
        let mut out = format!(
            "# inter_site_distance={} region_shape={} wrap_around={}\n",
            self.inter_site_distance, self.region_shape, self.wrap_around
        );
        let rows = self
            .mbs_positions
            .iter()
            .enumerate()
            .map(|(i, p)| (NodeKind::Mbs, i, *p, i))
            .chain(
                self.pbs_positions
                    .iter()
                    .zip(&self.pbs_cell)
                    .enumerate()
                    .map(|(i, (p, c))| (NodeKind::Pbs, i, *p, *c)),
            )
            .chain(
                self.user_positions
                    .iter()
                    .zip(&self.user_cell)
                    .enumerate()
                    .map(|(i, (p, c))| (NodeKind::User, i, *p, *c)),
            );
        for (kind, i, p, c) in rows {
            let _ = writeln!(out, "{}\t{}\t{}\t{}\t{}", kind.label(), i, p.x, p.y, c);
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Topology> {
        let mut topo = Topology {
            inter_site_distance: DeploymentConfig::default().inter_site_distance,
            region_shape: RegionShape::Hexagon,
            wrap_around: false,
            mbs_positions: Vec::new(),
            pbs_positions: Vec::new(),
            user_positions: Vec::new(),
            pbs_cell: Vec::new(),
            user_cell: Vec::new(),
        };
        for (lineno, line) in text.lines().enumerate() {
            let line_no = lineno + 1;
            let err = |msg: String| Error::Parse { line: line_no, msg };
            let line = line.trim_end();
            if line.is_empty() {
                continue;
            }
            if let Some(header) = line.strip_prefix('#') {
                for kv in header.split_whitespace() {
                    let Some((k, v)) = kv.split_once('=') else { continue };
                    match k {
                        "inter_site_distance" => {
                            topo.inter_site_distance = v.parse().map_err(|e| err(format!("{e}")))?
                        }
                        "region_shape" => topo.region_shape = v.parse().map_err(err)?,
                        "wrap_around" => {
                            topo.wrap_around = v.parse().map_err(|e| err(format!("{e}")))?
                        }
                        _ => {}
                    }
                }
                continue;
            }
            let fields: Vec<&str> = line.split('\t').collect();
            if fields.len() != 5 {
                return Err(err(format!("expected 5 fields, got {}", fields.len())));
            }
            let index: usize = fields[1].parse().map_err(|e| err(format!("index: {e}")))?;
            let x: f64 = fields[2].parse().map_err(|e| err(format!("x: {e}")))?;
            let y: f64 = fields[3].parse().map_err(|e| err(format!("y: {e}")))?;
            let cell: usize = fields[4].parse().map_err(|e| err(format!("cell: {e}")))?;
            let p = Point::new(x, y);
            let (list, expected) = match fields[0] {
                "MBS" => {
                    let n = topo.mbs_positions.len();
                    topo.mbs_positions.push(p);
                    (n, index)
                }
                "PBS" => {
                    let n = topo.pbs_positions.len();
                    topo.pbs_positions.push(p);
                    topo.pbs_cell.push(cell);
                    (n, index)
                }
                "USER" => {
                    let n = topo.user_positions.len();
                    topo.user_positions.push(p);
                    topo.user_cell.push(cell);
                    (n, index)
                }
                other => return Err(err(format!("unknown node kind `{other}`"))),
            };
            if list != expected {
                return Err(err(format!("index {expected} out of order, expected {list}")));
            }
        }
        Ok(topo)
    }
}

/// Hexagonal-lattice centers in spiral order: origin, then ring 1, ring 2, ...
pub fn macrocell_centers(count: usize, inter_site_distance: f64) -> Vec<Point> {
    // axial directions for flat-topped hexagons
    const DIRS: [(i64, i64); 6] = [(1, 0), (1, -1), (0, -1), (-1, 0), (-1, 1), (0, 1)];
    let r = inter_site_distance / SQRT3;
    let to_point = |q: i64, s: i64| {
        Point::new(1.5 * r * q as f64, SQRT3 * r * (s as f64 + 0.5 * q as f64))
    };
    let mut out = Vec::with_capacity(count);
    if count > 0 {
        out.push(Point::ORIGIN);
    }
    let mut ring = 1i64;
    while out.len() < count {
        let (mut q, mut s) = (DIRS[4].0 * ring, DIRS[4].1 * ring);
        for dir in DIRS {
            for _ in 0..ring {
                if out.len() == count {
                    return out;
                }
                out.push(to_point(q, s));
                q += dir.0;
                s += dir.1;
            }
        }
        ring += 1;
    }
    out
}

/// Translation vectors of the 7-cell cluster tiling, used for wrap-around.
fn cluster_shifts(inter_site_distance: f64) -> [Point; 6] {
    let r = inter_site_distance / SQRT3;
    let mut shifts = [Point::ORIGIN; 6];
    let (mut q, mut s) = (2i64, 1i64);
    for shift in &mut shifts {
        *shift = Point::new(1.5 * r * q as f64, SQRT3 * r * (s as f64 + 0.5 * q as f64));
        (q, s) = (-s, q + s);
    }
    shifts
}

pub fn macrocell_region(topology: &Topology, cell_index: usize) -> Result<MacrocellRegion> {
    let center = *topology
        .mbs_positions
        .get(cell_index)
        .ok_or(Error::CellOutOfRange {
            index: cell_index,
            count: topology.num_macrocells(),
        })?;
    Ok(MacrocellRegion {
        center,
        circumradius: topology.inter_site_distance / SQRT3,
        shape: topology.region_shape,
    })
}

pub fn generate_topology(config: &DeploymentConfig) -> Result<Topology> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut topo = Topology {
        inter_site_distance: config.inter_site_distance,
        region_shape: config.region_shape,
        wrap_around: config.wrap_around,
        mbs_positions: macrocell_centers(config.num_macrocells, config.inter_site_distance),
        pbs_positions: Vec::new(),
        user_positions: Vec::new(),
        pbs_cell: Vec::new(),
        user_cell: Vec::new(),
    };
    let regions: Vec<MacrocellRegion> = (0..config.num_macrocells)
        .map(|c| macrocell_region(&topo, c))
        .collect::<Result<_>>()?;

    // PBSs for every cell go down first so that users see all of them.
    for (cell, region) in regions.iter().enumerate() {
        for _ in 0..config.pbs_per_macrocell {
            let index = topo.pbs_positions.len();
            let p = place(&mut rng, region, "PBS", index, cell, |p| {
                topo.mbs_positions
                    .iter()
                    .all(|&m| topo.distance(p, m) >= config.min_pbs_mbs)
                    && topo
                        .pbs_positions
                        .iter()
                        .all(|&b| topo.distance(p, b) >= config.min_pbs_pbs)
            })?;
            topo.pbs_positions.push(p);
            topo.pbs_cell.push(cell);
        }
    }
    for (cell, region) in regions.iter().enumerate() {
        for _ in 0..config.users_per_macrocell {
            let index = topo.user_positions.len();
            let p = place(&mut rng, region, "user", index, cell, |p| {
                topo.mbs_positions
                    .iter()
                    .all(|&m| topo.distance(p, m) >= config.min_user_mbs)
                    && topo
                        .pbs_positions
                        .iter()
                        .all(|&b| topo.distance(p, b) >= config.min_user_pbs)
            })?;
            topo.user_positions.push(p);
            topo.user_cell.push(cell);
        }
    }
    Ok(topo)
}

fn place<R: Rng>(
    rng: &mut R,
    region: &MacrocellRegion,
    kind: &'static str,
    index: usize,
    cell: usize,
    accept: impl Fn(Point) -> bool,
) -> Result<Point> {
    for _ in 0..ATTEMPTS_PER_POINT {
        let p = region.sample(rng);
        if accept(p) {
            return Ok(p);
        }
    }
    Err(Error::PlacementInfeasible {
        kind,
        index,
        cell,
        attempts: ATTEMPTS_PER_POINT,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn single(pbs: usize, users: usize, seed: u64) -> DeploymentConfig {
        DeploymentConfig {
            pbs_per_macrocell: pbs,
            users_per_macrocell: users,
            seed,
            ..Default::default()
        }
    }

    #[test]
    fn empty_scatter_has_one_mbs_at_origin() {
        let topo = generate_topology(&single(0, 0, 1)).unwrap();
        assert_eq!(topo.mbs_positions, vec![Point::ORIGIN]);
        assert!(topo.pbs_positions.is_empty());
        assert!(topo.user_positions.is_empty());
    }

    #[test]
    fn same_seed_same_layout() {
        let a = generate_topology(&single(4, 30, 7)).unwrap();
        let b = generate_topology(&single(4, 30, 7)).unwrap();
        assert_eq!(a, b);
        let c = generate_topology(&single(4, 30, 8)).unwrap();
        assert_ne!(a.user_positions, c.user_positions);
    }

    #[test]
    fn hexagon_circumradius() {
        let topo = generate_topology(&single(0, 0, 0)).unwrap();
        let region = macrocell_region(&topo, 0).unwrap();
        assert!((region.circumradius - 577.350_269_189_625_8).abs() < 1e-9);
        assert!(region.contains(Point::ORIGIN));
        // vertex on the x axis, apothem along y
        assert!(region.contains(Point::new(577.0, 0.0)));
        assert!(!region.contains(Point::new(0.0, 501.0)));
        assert!(!region.contains(Point::new(2000.0, 0.0)));
    }

    #[test]
    fn far_point_is_outside_every_cell() {
        let cfg = DeploymentConfig {
            num_macrocells: 7,
            pbs_per_macrocell: 0,
            users_per_macrocell: 0,
            ..Default::default()
        };
        let topo = generate_topology(&cfg).unwrap();
        // 2000 m from all seven centers
        let far = Point::new(0.0, 3000.0);
        assert!(topo.mbs_positions.iter().all(|&m| m.dist(far) >= 2000.0));
        for c in 0..7 {
            assert!(!macrocell_region(&topo, c).unwrap().contains(far));
        }
        assert!(matches!(
            macrocell_region(&topo, 7),
            Err(Error::CellOutOfRange { index: 7, count: 7 })
        ));
    }

    #[test]
    fn first_ring_is_one_inter_site_distance_away() {
        let centers = macrocell_centers(19, 1000.0);
        for c in &centers[1..7] {
            assert!((c.dist(Point::ORIGIN) - 1000.0).abs() < 1e-9);
        }
        for c in &centers[7..] {
            assert!(c.dist(Point::ORIGIN) > 1500.0);
        }
        // no duplicates
        for i in 0..centers.len() {
            for j in 0..i {
                assert!(centers[i].dist(centers[j]) > 999.0);
            }
        }
    }

    #[test]
    fn neighbouring_hexagons_share_an_edge_without_overlap() {
        let cfg = DeploymentConfig {
            num_macrocells: 7,
            pbs_per_macrocell: 0,
            users_per_macrocell: 0,
            ..Default::default()
        };
        let topo = generate_topology(&cfg).unwrap();
        let regions: Vec<_> = (0..7).map(|c| macrocell_region(&topo, c).unwrap()).collect();
        // midpoints between center and each neighbour lie on a shared edge
        for n in 1..7 {
            let m = topo.mbs_positions[n];
            let mid = Point::new(m.x / 2.0, m.y / 2.0);
            let inside_a = Point::new(mid.x * 0.99, mid.y * 0.99);
            let inside_b = Point::new(mid.x * 1.01, mid.y * 1.01);
            assert!(regions[0].contains(inside_a) && !regions[n].contains(inside_a));
            assert!(regions[n].contains(inside_b) && !regions[0].contains(inside_b));
        }
    }

    #[test]
    fn over_dense_layout_fails_instead_of_shrinking() {
        let cfg = DeploymentConfig {
            pbs_per_macrocell: 500,
            ..single(500, 0, 3)
        };
        match generate_topology(&cfg) {
            Err(Error::PlacementInfeasible { kind: "PBS", .. }) => {}
            other => panic!("expected placement failure, got {other:?}"),
        }
    }

    #[test]
    fn invalid_configs_rejected() {
        let bad = DeploymentConfig {
            min_pbs_pbs: 0.0,
            ..Default::default()
        };
        assert!(matches!(generate_topology(&bad), Err(Error::InvalidConfig(_))));
        let bad = DeploymentConfig {
            wrap_around: true,
            ..Default::default()
        };
        assert!(matches!(generate_topology(&bad), Err(Error::InvalidConfig(_))));
    }

    #[test]
    fn wrap_around_distance_never_exceeds_direct() {
        let cfg = DeploymentConfig {
            num_macrocells: 7,
            wrap_around: true,
            pbs_per_macrocell: 2,
            users_per_macrocell: 5,
            ..Default::default()
        };
        let topo = generate_topology(&cfg).unwrap();
        let shifts = cluster_shifts(1000.0);
        for s in shifts {
            assert!((s.dist(Point::ORIGIN) - 1000.0 * 7f64.sqrt()).abs() < 1e-9);
        }
        // opposite corners of the cluster are neighbours under wrapping
        let a = topo.mbs_positions[1];
        let b = topo.mbs_positions[4];
        assert!((a.dist(b) - 2000.0).abs() < 1e-9);
        assert!((topo.distance(a, b) - 1000.0).abs() < 1e-6);
        for &u in &topo.user_positions {
            for &m in &topo.mbs_positions {
                assert!(topo.distance(u, m) <= u.dist(m));
                assert!(topo.distance(u, m) >= cfg.min_user_mbs);
            }
        }
    }

    #[test]
    fn text_format_round_trips() {
        let topo = generate_topology(&single(3, 10, 42)).unwrap();
        let text = topo.to_text();
        assert!(text.lines().nth(1).unwrap().starts_with("MBS\t0\t0\t0\t0"));
        assert_eq!(text.lines().filter(|l| l.starts_with("USER\t")).count(), 10);
        assert_eq!(Topology::from_text(&text).unwrap(), topo);
        assert!(Topology::from_text("BOGUS\t0\t1\t2\t0").is_err());
        assert!(Topology::from_text("PBS\t1\t1\t2\t0").is_err());
    }
}
