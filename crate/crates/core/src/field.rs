//! Vorticity fields on uniform 2D grids: the node source of the network.
//!
//! Node `i` sits at grid row `r = i / nx`, column `c = i % nx`, position
//! `(c·dx, r·dy)`. Values are stored row-major.

use std::f64::consts::PI;
use std::fs;
use std::io::Write;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

pub const BINARY_MAGIC: &[u8; 6] = b"VORT1\n";
const BINARY_HEADER_LEN: usize = 6 + 4 * 8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub nx: usize,
    pub ny: usize,
    pub dx: f64,
    pub dy: f64,
}

impl GridSpec {
    pub fn new(nx: usize, ny: usize, dx: f64, dy: f64) -> Result<Self> {
        if nx < 2 || ny < 2 {
            return Err(Error::InvalidGrid(format!(
                "need nx >= 2 and ny >= 2, got {nx}x{ny}"
            )));
        }
        if !(dx.is_finite() && dy.is_finite() && dx > 0.0 && dy > 0.0) {
            return Err(Error::InvalidGrid(format!(
                "spacing must be positive and finite, got dx={dx}, dy={dy}"
            )));
        }
        nx.checked_mul(ny)
            .ok_or_else(|| Error::InvalidGrid("nx*ny overflows".into()))?;
        Ok(Self { nx, ny, dx, dy })
    }

    /// Grid with `nx × ny` nodes covering `[0, lx) × [0, ly)`.
    pub fn covering(nx: usize, ny: usize, lx: f64, ly: f64) -> Result<Self> {
        Self::new(nx, ny, lx / nx as f64, ly / ny as f64)
    }

    /// Node count, also the adjacency dimension.
    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn cell_area(&self) -> f64 {
        self.dx * self.dy
    }

    pub fn extent(&self) -> (f64, f64) {
        (self.nx as f64 * self.dx, self.ny as f64 * self.dy)
    }

    #[inline]
    pub fn index(&self, row: usize, col: usize) -> usize {
        row * self.nx + col
    }

    #[inline]
    pub fn coords(&self, index: usize) -> (usize, usize) {
        (index / self.nx, index % self.nx)
    }

    #[inline]
    pub fn position(&self, index: usize) -> (f64, f64) {
        let (r, c) = self.coords(index);
        (c as f64 * self.dx, r as f64 * self.dy)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VorticityField {
    grid: GridSpec,
    omega: Vec<f64>,
}

impl VorticityField {
    pub fn new(grid: GridSpec, omega: Vec<f64>) -> Result<Self> {
        let grid = GridSpec::new(grid.nx, grid.ny, grid.dx, grid.dy)?;
        if omega.len() != grid.len() {
            return Err(Error::DimensionMismatch {
                expected: grid.len(),
                found: omega.len(),
            });
        }
        if let Some(index) = omega.iter().position(|w| !w.is_finite()) {
            return Err(Error::NonFinite { index });
        }
        Ok(Self { grid, omega })
    }

    pub fn zeros(grid: GridSpec) -> Self {
        Self {
            omega: vec![0.0; grid.len()],
            grid,
        }
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn omega(&self) -> &[f64] {
        &self.omega
    }

    pub fn len(&self) -> usize {
        self.omega.len()
    }

    pub fn is_empty(&self) -> bool {
        self.omega.is_empty()
    }

    /// Same grid, every value multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        Self::new(self.grid, self.omega.iter().map(|w| w * factor).collect())
    }

    /// Total absolute circulation `Σ|ω_i|·dx·dy`.
    pub fn total_abs_circulation(&self) -> f64 {
        self.omega.iter().map(|w| w.abs()).sum::<f64>() * self.grid.cell_area()
    }

    /// Hex SHA-256 of the binary encoding.
    pub fn checksum(&self) -> String {
        let digest = Sha256::digest(encode_binary(self));
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FieldFormat {
    Text,
    Binary,
}

impl FieldFormat {
    /// Binary if the bytes start with the magic header, text otherwise.
    pub fn sniff(bytes: &[u8]) -> Self {
        if bytes.starts_with(BINARY_MAGIC) {
            FieldFormat::Binary
        } else {
            FieldFormat::Text
        }
    }
}

pub fn load_field(path: impl AsRef<Path>, format: FieldFormat) -> Result<VorticityField> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    match format {
        FieldFormat::Binary => decode_binary(&bytes),
        FieldFormat::Text => {
            let text = std::str::from_utf8(&bytes)
                .map_err(|_| Error::MalformedData("text field is not valid UTF-8".into()))?;
            parse_text(text)
        }
    }
}

/// Loads a field, choosing the format from the file's leading bytes.
pub fn load_field_auto(path: impl AsRef<Path>) -> Result<VorticityField> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    match FieldFormat::sniff(&bytes) {
        FieldFormat::Binary => decode_binary(&bytes),
        FieldFormat::Text => parse_text(
            std::str::from_utf8(&bytes)
                .map_err(|_| Error::MalformedData("text field is not valid UTF-8".into()))?,
        ),
    }
}

pub fn save_field(
    field: &VorticityField,
    path: impl AsRef<Path>,
    format: FieldFormat,
) -> Result<()> {
    let path = path.as_ref();
    let bytes = match format {
        FieldFormat::Binary => encode_binary(field),
        FieldFormat::Text => format_text(field).into_bytes(),
    };
    let mut file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    file.write_all(&bytes).map_err(|e| Error::io(path, e))?;
    file.flush().map_err(|e| Error::io(path, e))
}

pub fn encode_binary(field: &VorticityField) -> Vec<u8> {
    let g = field.grid();
    let mut out = Vec::with_capacity(BINARY_HEADER_LEN + 8 * field.len());
    out.extend_from_slice(BINARY_MAGIC);
    out.extend_from_slice(&(g.nx as u64).to_le_bytes());
    out.extend_from_slice(&(g.ny as u64).to_le_bytes());
    out.extend_from_slice(&g.dx.to_le_bytes());
    out.extend_from_slice(&g.dy.to_le_bytes());
    for w in field.omega() {
        out.extend_from_slice(&w.to_le_bytes());
    }
    out
}

pub fn decode_binary(bytes: &[u8]) -> Result<VorticityField> {
    if bytes.len() < BINARY_HEADER_LEN {
        return Err(Error::MalformedHeader(format!(
            "binary header needs {BINARY_HEADER_LEN} bytes, file has {}",
            bytes.len()
        )));
    }
    if &bytes[..6] != BINARY_MAGIC {
        return Err(Error::MalformedHeader("missing VORT1 magic".into()));
    }
    let word = |k: usize| -> [u8; 8] { bytes[6 + 8 * k..14 + 8 * k].try_into().unwrap() };
    let nx = usize::try_from(u64::from_le_bytes(word(0)))
        .map_err(|_| Error::MalformedHeader("nx does not fit in usize".into()))?;
    let ny = usize::try_from(u64::from_le_bytes(word(1)))
        .map_err(|_| Error::MalformedHeader("ny does not fit in usize".into()))?;
    let dx = f64::from_le_bytes(word(2));
    let dy = f64::from_le_bytes(word(3));
    let grid = GridSpec::new(nx, ny, dx, dy)
        .map_err(|e| Error::MalformedHeader(e.to_string()))?;

    let body = &bytes[BINARY_HEADER_LEN..];
    if body.len() % 8 != 0 {
        return Err(Error::MalformedData(format!(
            "payload of {} bytes is not a whole number of f64 values",
            body.len()
        )));
    }
    let found = body.len() / 8;
    if found != grid.len() {
        return Err(Error::DimensionMismatch {
            expected: grid.len(),
            found,
        });
    }
    let omega = body
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    VorticityField::new(grid, omega)
}

pub fn format_text(field: &VorticityField) -> String {
    let g = field.grid();
    let mut out = format!("{} {} {} {}\n", g.nx, g.ny, g.dx, g.dy);
    for row in field.omega().chunks(g.nx) {
        let line: Vec<String> = row.iter().map(|w| format!("{w:.16e}")).collect();
        out.push_str(&line.join(" "));
        out.push('\n');
    }
    out
}

pub fn parse_text(text: &str) -> Result<VorticityField> {
    let mut lines = text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'));
    let header = lines
        .next()
        .ok_or_else(|| Error::MalformedHeader("empty file".into()))?;
    let parts: Vec<&str> = header.split_whitespace().collect();
    if parts.len() != 4 {
        return Err(Error::MalformedHeader(format!(
            "expected \"nx ny dx dy\", got {header:?}"
        )));
    }
    let bad = |what: &str| Error::MalformedHeader(format!("cannot parse {what} in {header:?}"));
    let nx: usize = parts[0].parse().map_err(|_| bad("nx"))?;
    let ny: usize = parts[1].parse().map_err(|_| bad("ny"))?;
    let dx: f64 = parts[2].parse().map_err(|_| bad("dx"))?;
    let dy: f64 = parts[3].parse().map_err(|_| bad("dy"))?;
    let grid =
        GridSpec::new(nx, ny, dx, dy).map_err(|e| Error::MalformedHeader(e.to_string()))?;

    let mut omega = Vec::with_capacity(grid.len());
    for tok in lines.flat_map(str::split_whitespace) {
        let w: f64 = tok
            .parse()
            .map_err(|_| Error::MalformedData(format!("cannot parse value {tok:?}")))?;
        if !w.is_finite() {
            return Err(Error::NonFinite { index: omega.len() });
        }
        omega.push(w);
    }
    VorticityField::new(grid, omega)
}

/// One Gaussian vortex: `ω(x) = Γ/(π r²)·exp(−|x − c|²/r²)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianVortex {
    pub circulation: f64,
    pub core: f64,
    pub center: (f64, f64),
}

impl GaussianVortex {
    #[inline]
    pub fn vorticity_at(&self, x: f64, y: f64) -> f64 {
        let ddx = x - self.center.0;
        let ddy = y - self.center.1;
        let r2 = self.core * self.core;
        self.circulation / (PI * r2) * (-(ddx * ddx + ddy * ddy) / r2).exp()
    }
}

/// Superposes the given vortices on the grid nodes.
pub fn field_from_vortices(grid: GridSpec, vortices: &[GaussianVortex]) -> Result<VorticityField> {
    for v in vortices {
        if !(v.core > 0.0 && v.core.is_finite()) {
            return Err(Error::InvalidRange(format!("core radius {} must be > 0", v.core)));
        }
    }
    let omega = (0..grid.len())
        .map(|i| {
            let (x, y) = grid.position(i);
            vortices.iter().map(|v| v.vorticity_at(x, y)).sum()
        })
        .collect();
    VorticityField::new(grid, omega)
}

/// Draws `count` Gaussian vortices with strengths uniform in `strength`, core
/// radii uniform in `core` and centers uniform over the grid's extent.
pub fn random_vortices(
    grid: &GridSpec,
    count: usize,
    seed: u64,
    strength: (f64, f64),
    core: (f64, f64),
) -> Result<Vec<GaussianVortex>> {
    if count == 0 {
        return Err(Error::InvalidRange("need at least one vortex".into()));
    }
    check_interval("strength", strength, false)?;
    check_interval("core", core, true)?;
    let (lx, ly) = grid.extent();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok((0..count)
        .map(|_| {
            let circulation = draw(&mut rng, strength);
            let core = draw(&mut rng, core);
            let cx = rng.random::<f64>() * lx;
            let cy = rng.random::<f64>() * ly;
            GaussianVortex {
                circulation,
                core,
                center: (cx, cy),
            }
        })
        .collect())
}

/// Random Gaussian-vortex field; a pure function of its arguments.
pub fn synth_vortex_field(
    grid: GridSpec,
    count: usize,
    seed: u64,
    strength: (f64, f64),
    core: (f64, f64),
) -> Result<VorticityField> {
    let vortices = random_vortices(&grid, count, seed, strength, core)?;
    field_from_vortices(grid, &vortices)
}

fn check_interval(name: &str, (lo, hi): (f64, f64), positive: bool) -> Result<()> {
    if !(lo.is_finite() && hi.is_finite()) || lo > hi {
        return Err(Error::InvalidRange(format!("{name} range [{lo}, {hi}] is empty")));
    }
    if positive && lo <= 0.0 {
        return Err(Error::InvalidRange(format!(
            "{name} range [{lo}, {hi}] must be strictly positive"
        )));
    }
    Ok(())
}

fn draw(rng: &mut ChaCha8Rng, (lo, hi): (f64, f64)) -> f64 {
    if lo == hi {
        lo
    } else {
        rng.random_range(lo..hi)
    }
}

/// Parameters of the decaying-turbulence-like test field: vortices scattered
/// over a `2π × 2π` box.
pub mod turbulence {
    use std::f64::consts::TAU;

    pub const VORTICES: usize = 100;
    pub const STRENGTH: (f64, f64) = (-1.0, 1.0);
    pub const CORE: (f64, f64) = (0.1, 0.3);
    pub const EXTENT: (f64, f64) = (TAU, TAU);
}

pub fn turbulence_field(nx: usize, ny: usize, seed: u64) -> Result<VorticityField> {
    let grid = GridSpec::covering(nx, ny, turbulence::EXTENT.0, turbulence::EXTENT.1)?;
    synth_vortex_field(
        grid,
        turbulence::VORTICES,
        seed,
        turbulence::STRENGTH,
        turbulence::CORE,
    )
}

/// Layout of the airfoil-wake-like test field: a `5.53 × 3.31` window holding
/// three shed 2P vortex pairs that weaken downstream.
pub mod wake {
    pub const EXTENT: (f64, f64) = (5.53, 3.31);
    pub const PAIRS: usize = 3;
    pub const CORE: f64 = 0.3;
    pub const DECAY: f64 = 0.75;
    pub const OFFSET: f64 = 0.3;
    /// Secondary vortex: streamwise lag and relative strength.
    pub const TRAIL_LAG: f64 = 0.35;
    pub const TRAIL_RATIO: f64 = 0.7;
    pub const JITTER: f64 = 0.03;
    pub const FIRST_X: f64 = 0.5;
}

pub fn wake_vortices(grid: &GridSpec, seed: u64) -> Vec<GaussianVortex> {
    let (lx, ly) = grid.extent();
    let sx = lx / wake::EXTENT.0;
    let sy = ly / wake::EXTENT.1;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let jitter = Normal::new(0.0, wake::JITTER).expect("valid normal");
    let spacing = (wake::EXTENT.0 - 0.8) / (wake::PAIRS - 1) as f64;
    let mut out = Vec::with_capacity(2 * wake::PAIRS);
    for p in 0..wake::PAIRS {
        let side = if p % 2 == 0 { 1.0 } else { -1.0 };
        let x0 = wake::FIRST_X + p as f64 * spacing;
        let strength = wake::DECAY.powi(p as i32);
        let members = [
            (0.0, side * wake::OFFSET, side * strength),
            (
                wake::TRAIL_LAG,
                side * wake::OFFSET * 0.5,
                -side * wake::TRAIL_RATIO * strength,
            ),
        ];
        for (lag, dy, circulation) in members {
            let cx = x0 + lag + jitter.sample(&mut rng);
            let cy = wake::EXTENT.1 / 2.0 + dy + jitter.sample(&mut rng);
            out.push(GaussianVortex {
                circulation,
                core: wake::CORE * sx.min(sy),
                center: (cx * sx, cy * sy),
            });
        }
    }
    out
}

/// Wake-like field; the layout is scaled to the grid's extent.
pub fn wake_field(nx: usize, ny: usize, seed: u64) -> Result<VorticityField> {
    let grid = GridSpec::covering(nx, ny, wake::EXTENT.0, wake::EXTENT.1)?;
    field_from_vortices(grid, &wake_vortices(&grid, seed))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn grid(nx: usize, ny: usize) -> GridSpec {
        GridSpec::new(nx, ny, 1.0, 1.0).unwrap()
    }

    #[test]
    fn grid_rejects_degenerate() {
        assert!(GridSpec::new(1, 4, 1.0, 1.0).is_err());
        assert!(GridSpec::new(4, 4, 0.0, 1.0).is_err());
        assert!(GridSpec::new(4, 4, 1.0, f64::NAN).is_err());
    }

    #[test]
    fn field_rejects_nan_and_wrong_len() {
        let g = grid(2, 2);
        assert!(matches!(
            VorticityField::new(g, vec![0.0; 3]),
            Err(Error::DimensionMismatch { expected: 4, found: 3 })
        ));
        assert!(matches!(
            VorticityField::new(g, vec![0.0, f64::INFINITY, 0.0, 0.0]),
            Err(Error::NonFinite { index: 1 })
        ));
    }

    #[test]
    fn parse_zero_field() {
        let f = parse_text("2 2 1.0 1.0\n0 0 0 0\n").unwrap();
        assert_eq!(f.len(), 4);
        assert!(f.omega().iter().all(|&w| w == 0.0));
    }

    #[test]
    fn parse_skips_comments() {
        let f = parse_text("# produced by hand\n2 2 0.5 0.25\n# row 0\n1 2\n3 4\n").unwrap();
        assert_eq!(f.omega(), &[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(f.grid().dy, 0.25);
    }

    #[test]
    fn parse_errors_are_distinct() {
        assert!(matches!(parse_text("2 2 1.0\n0 0 0 0"), Err(Error::MalformedHeader(_))));
        assert!(matches!(
            parse_text("2 2 1 1\n0 0 0"),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(matches!(parse_text("2 2 1 1\n0 0 x 0"), Err(Error::MalformedData(_))));
        assert!(matches!(parse_text("2 2 1 1\n0 0 inf 0"), Err(Error::NonFinite { index: 2 })));
    }

    #[test]
    fn binary_short_payload_is_dimension_mismatch() {
        let f = VorticityField::new(GridSpec::new(3, 4, 1.0, 1.0).unwrap(), vec![1.0; 12]).unwrap();
        let mut bytes = encode_binary(&f);
        bytes.truncate(bytes.len() - 8);
        assert!(matches!(
            decode_binary(&bytes),
            Err(Error::DimensionMismatch { expected: 12, found: 11 })
        ));
    }

    #[test]
    fn binary_bad_magic() {
        let f = VorticityField::zeros(grid(2, 2));
        let mut bytes = encode_binary(&f);
        bytes[0] = b'X';
        assert!(matches!(decode_binary(&bytes), Err(Error::MalformedHeader(_))));
    }

    #[test]
    fn single_vortex_peak_is_one() {
        let g = grid(5, 5);
        let v = GaussianVortex {
            circulation: PI,
            core: 1.0,
            center: g.position(g.index(2, 3)),
        };
        let f = field_from_vortices(g, &[v]).unwrap();
        assert_eq!(f.omega()[g.index(2, 3)], 1.0);
    }

    #[test]
    fn synth_is_deterministic() {
        let g = GridSpec::covering(32, 24, 6.0, 4.0).unwrap();
        let a = synth_vortex_field(g, 10, 7, (-1.0, 1.0), (0.1, 0.3)).unwrap();
        let b = synth_vortex_field(g, 10, 7, (-1.0, 1.0), (0.1, 0.3)).unwrap();
        let c = synth_vortex_field(g, 10, 8, (-1.0, 1.0), (0.1, 0.3)).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn synth_rejects_bad_ranges() {
        let g = grid(4, 4);
        assert!(synth_vortex_field(g, 0, 1, (0.0, 1.0), (0.1, 0.2)).is_err());
        assert!(synth_vortex_field(g, 1, 1, (1.0, 0.0), (0.1, 0.2)).is_err());
        assert!(synth_vortex_field(g, 1, 1, (0.0, 1.0), (0.0, 0.2)).is_err());
    }

    #[test]
    fn total_circulation_matches_sampled_strengths() {
        // Positive strengths and small cores: no cancellation, little truncation.
        let g = GridSpec::covering(256, 256, std::f64::consts::TAU, std::f64::consts::TAU).unwrap();
        let vortices = random_vortices(&g, 100, 3, (0.5, 1.0), (0.05, 0.1)).unwrap();
        let f = field_from_vortices(g, &vortices).unwrap();
        let expected: f64 = vortices.iter().map(|v| v.circulation.abs()).sum();
        let got = f.total_abs_circulation();
        assert!((got - expected).abs() / expected < 0.05, "{got} vs {expected}");
    }

    #[test]
    fn wake_has_three_pairs_overlapping_window() {
        let f = wake_field(64, 64, 0).unwrap();
        let g = f.grid();
        let vs = wake_vortices(g, 0);
        assert_eq!(vs.len(), 6);
        let (lx, ly) = g.extent();
        assert!(vs.iter().all(|v| {
            let r = v.core;
            v.center.0 > -r && v.center.0 < lx + r && v.center.1 > -r && v.center.1 < ly + r
        }));
        assert_eq!(vs.iter().filter(|v| v.circulation > 0.0).count(), 3);
    }

    #[test]
    fn checksum_tracks_content() {
        let a = turbulence_field(8, 8, 1).unwrap();
        assert_eq!(a.checksum(), turbulence_field(8, 8, 1).unwrap().checksum());
        assert_ne!(a.checksum(), turbulence_field(8, 8, 2).unwrap().checksum());
        assert_eq!(a.checksum().len(), 64);
    }

    proptest! {
        #[test]
        fn index_bijection(nx in 2usize..40, ny in 2usize..40, seed in any::<u64>()) {
            let g = grid(nx, ny);
            let i = (seed as usize) % g.len();
            let (r, c) = g.coords(i);
            prop_assert!(r < ny && c < nx);
            prop_assert_eq!(g.index(r, c), i);
        }

        #[test]
        fn binary_round_trip_is_exact(
            nx in 2usize..12,
            ny in 2usize..12,
            vals in proptest::collection::vec(-1e6f64..1e6, 144),
        ) {
            let g = GridSpec::new(nx, ny, 0.37, 1.9).unwrap();
            let f = VorticityField::new(g, vals[..g.len()].to_vec()).unwrap();
            let back = decode_binary(&encode_binary(&f)).unwrap();
            prop_assert_eq!(back, f);
        }

        #[test]
        fn text_round_trip_within_one_ulp(
            vals in proptest::collection::vec(proptest::num::f64::NORMAL | proptest::num::f64::ZERO, 12),
        ) {
            let g = GridSpec::new(3, 4, 0.1, 0.3).unwrap();
            let f = VorticityField::new(g, vals).unwrap();
            let back = parse_text(&format_text(&f)).unwrap();
            prop_assert_eq!(back.grid(), f.grid());
            for (a, b) in f.omega().iter().zip(back.omega()) {
                let ulps = (a.to_bits() as i64 - b.to_bits() as i64).abs();
                prop_assert!(ulps <= 1, "{} vs {}", a, b);
            }
        }
    }
}
