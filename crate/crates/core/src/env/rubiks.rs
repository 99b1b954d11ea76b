//! The 3×3×3 cube as 54 sticker colours.
//!
//! Faces are stored in the order U, R, F, D, L, B, each row-major as seen
//! from outside the cube with the usual net orientation (U's top row
//! touches B, F/R/B/L have U above them, D's top row touches F). The solved
//! cube is `000000000|111111111|...|555555555`. Moves are the twelve
//! quarter turns: `U` turns the up face clockwise as seen from above and
//! `U'` is its inverse.

use std::sync::OnceLock;

use rand::Rng;

use super::{problem_rng, ActionEdge, EnvError, Environment};

const NAME: &str = "rubiks-cube";
pub const STICKERS: usize = 54;
const FACES: [char; 6] = ['U', 'R', 'F', 'D', 'L', 'B'];

type V3 = [i32; 3];

fn facelet_geometry(face: usize, r: i32, c: i32) -> (V3, V3) {
    match face {
        0 => ([c - 1, 1, r - 1], [0, 1, 0]),
        1 => ([1, 1 - r, 1 - c], [1, 0, 0]),
        2 => ([c - 1, 1 - r, 1], [0, 0, 1]),
        3 => ([c - 1, -1, 1 - r], [0, -1, 0]),
        4 => ([-1, 1 - r, c - 1], [-1, 0, 0]),
        _ => ([1 - c, 1 - r, -1], [0, 0, -1]),
    }
}

fn cross(a: V3, b: V3) -> V3 {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

fn dot(a: V3, b: V3) -> i32 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

/// Rotation by −90° about the unit axis `n`: clockwise seen from `+n`.
fn rotate_cw(v: V3, n: V3) -> V3 {
    let c = cross(n, v);
    let d = dot(n, v);
    [n[0] * d - c[0], n[1] * d - c[1], n[2] * d - c[2]]
}

/// `perm[i]` is the sticker position that the sticker at `i` moves to.
fn build_moves() -> [[usize; STICKERS]; 12] {
    let mut geom = Vec::with_capacity(STICKERS);
    for face in 0..6 {
        for r in 0..3 {
            for c in 0..3 {
                geom.push(facelet_geometry(face, r, c));
            }
        }
    }
    let index_of = |g: (V3, V3)| geom.iter().position(|&x| x == g).expect("valid facelet");
    let mut moves = [[0usize; STICKERS]; 12];
    for face in 0..6 {
        let axis = geom[face * 9 + 4].1;
        let mut cw = [0usize; STICKERS];
        for (i, &(pos, normal)) in geom.iter().enumerate() {
            cw[i] = if dot(pos, axis) == 1 {
                index_of((rotate_cw(pos, axis), rotate_cw(normal, axis)))
            } else {
                i
            };
        }
        let mut ccw = [0usize; STICKERS];
        for (i, &j) in cw.iter().enumerate() {
            ccw[j] = i;
        }
        moves[2 * face] = cw;
        moves[2 * face + 1] = ccw;
    }
    moves
}

fn moves() -> &'static [[usize; STICKERS]; 12] {
    static MOVES: OnceLock<[[usize; STICKERS]; 12]> = OnceLock::new();
    MOVES.get_or_init(build_moves)
}

/// Move `m` in 0..12: face `m / 2`, inverted when `m` is odd.
pub fn move_name(m: usize) -> String {
    let f = FACES[m / 2];
    if m % 2 == 0 {
        f.to_string()
    } else {
        format!("{f}'")
    }
}

pub fn parse_move(name: &str) -> Option<usize> {
    (0..12).find(|&m| move_name(m) == name)
}

pub fn inverse_move(m: usize) -> usize {
    m ^ 1
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CubeState {
    pub stickers: [u8; STICKERS],
}

impl CubeState {
    pub fn solved() -> Self {
        let mut stickers = [0u8; STICKERS];
        for (i, s) in stickers.iter_mut().enumerate() {
            *s = (i / 9) as u8;
        }
        CubeState { stickers }
    }

    pub fn parse(text: &str) -> Result<Self, EnvError> {
        let groups: Vec<&str> = text.split('|').collect();
        if groups.len() != 6 {
            return Err(EnvError::parse(NAME, text, 0, "expected six '|'-separated faces"));
        }
        let mut stickers = [0u8; STICKERS];
        let mut counts = [0usize; 6];
        for (f, g) in groups.iter().enumerate() {
            let b = g.as_bytes();
            if b.len() != 9 {
                return Err(EnvError::parse(NAME, text, f * 10, "each face has nine stickers"));
            }
            for (k, &ch) in b.iter().enumerate() {
                if !(b'0'..=b'5').contains(&ch) {
                    return Err(EnvError::parse(NAME, text, f * 10 + k, "colours are 0 to 5"));
                }
                stickers[f * 9 + k] = ch - b'0';
                counts[(ch - b'0') as usize] += 1;
            }
        }
        if counts.iter().any(|&c| c != 9) {
            return Err(EnvError::parse(NAME, text, 0, "each colour must appear nine times"));
        }
        if (0..6).any(|f| stickers[f * 9 + 4] != f as u8) {
            return Err(EnvError::parse(NAME, text, 0, "face centres are fixed"));
        }
        Ok(CubeState { stickers })
    }

    pub fn apply_move(&self, m: usize) -> CubeState {
        let perm = &moves()[m];
        let mut stickers = [0u8; STICKERS];
        for (i, &j) in perm.iter().enumerate() {
            stickers[j] = self.stickers[i];
        }
        CubeState { stickers }
    }

    pub fn is_solved(&self) -> bool {
        self.stickers.iter().enumerate().all(|(i, &s)| s as usize == i / 9)
    }
}

impl std::fmt::Display for CubeState {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for face in 0..6 {
            if face > 0 {
                f.write_str("|")?;
            }
            for &s in &self.stickers[face * 9..face * 9 + 9] {
                write!(f, "{s}")?;
            }
        }
        Ok(())
    }
}

/// Exactly `k` uniformly random quarter turns from the solved cube.
pub fn generate_scramble(seed: u64, k: usize) -> CubeState {
    let mut rng = problem_rng(seed);
    scramble_with(&mut rng, k)
}

fn scramble_with<R: Rng>(rng: &mut R, k: usize) -> CubeState {
    let mut s = CubeState::solved();
    for _ in 0..k {
        s = s.apply_move(rng.random_range(0..12));
    }
    s
}

/// Generated problems take a scramble length uniform in `1..=max_scramble`.
#[derive(Debug, Clone, Copy)]
pub struct RubiksCube {
    pub max_scramble: usize,
}

impl Default for RubiksCube {
    fn default() -> Self {
        RubiksCube { max_scramble: 20 }
    }
}

impl Environment for RubiksCube {
    fn name(&self) -> &'static str {
        NAME
    }

    fn generate(&self, seed: u64) -> String {
        let mut rng = problem_rng(seed);
        let k = rng.random_range(1..=self.max_scramble.max(1));
        scramble_with(&mut rng, k).to_string()
    }

    fn expand(&self, state: &str) -> Result<Vec<ActionEdge>, EnvError> {
        let s = CubeState::parse(state)?;
        if s.is_solved() {
            return Ok(Vec::new());
        }
        Ok((0..12)
            .map(|m| ActionEdge::new(move_name(m), s.apply_move(m).to_string()))
            .collect())
    }

    fn is_solved(&self, state: &str) -> Result<bool, EnvError> {
        Ok(CubeState::parse(state)?.is_solved())
    }

    fn canonicalize(&self, state: &str) -> Result<String, EnvError> {
        Ok(CubeState::parse(state)?.to_string())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solved_string() {
        assert_eq!(
            CubeState::solved().to_string(),
            "000000000|111111111|222222222|333333333|444444444|555555555"
        );
    }

    #[test]
    fn every_move_has_order_four_and_an_inverse() {
        let s = generate_scramble(7, 25);
        for m in 0..12 {
            let mut t = s.clone();
            for _ in 0..4 {
                t = t.apply_move(m);
            }
            assert_eq!(t, s);
            assert_eq!(s.apply_move(m).apply_move(inverse_move(m)), s);
            assert_ne!(s.apply_move(m), s);
        }
    }

    #[test]
    fn sexy_move_has_order_six() {
        let seq = ["R", "U", "R'", "U'"].map(|n| parse_move(n).unwrap());
        let mut s = CubeState::solved();
        for rep in 1..=6 {
            for &m in &seq {
                s = s.apply_move(m);
            }
            assert_eq!(s.is_solved(), rep == 6);
        }
    }

    #[test]
    fn up_turn_cycles_side_top_rows() {
        // Clockwise from above: the front top row goes to the left face.
        let s = CubeState::solved().apply_move(parse_move("U").unwrap());
        assert_eq!(&s.stickers[36..39], &[2, 2, 2]);
        assert_eq!(&s.stickers[18..21], &[1, 1, 1]);
        assert_eq!(&s.stickers[9..12], &[5, 5, 5]);
        assert_eq!(&s.stickers[45..48], &[4, 4, 4]);
        assert_eq!(&s.stickers[39..42], &[4, 4, 4]);
    }

    #[test]
    fn right_turn_moves_front_column_up() {
        let s = CubeState::solved().apply_move(parse_move("R").unwrap());
        for r in 0..3 {
            assert_eq!(s.stickers[r * 3 + 2], 2, "U column takes F colour");
            assert_eq!(s.stickers[45 + r * 3], 0, "B column takes U colour");
        }
    }

    #[test]
    fn parse_rejects_bad_cubes() {
        assert!(CubeState::parse("000000000|111111111").is_err());
        assert!(CubeState::parse("000000001|111111111|222222222|333333333|444444444|555555555").is_err());
        assert!(CubeState::parse("000010000|111101111|222222222|333333333|444444444|555555555").is_err());
    }

    #[test]
    fn scramble_of_one_is_one_move_away() {
        let env = RubiksCube { max_scramble: 1 };
        for seed in 0..20 {
            let s = env.generate(seed);
            assert!(env.expand(&s).unwrap().iter().any(|e| env.is_solved(&e.next_state).unwrap()));
        }
    }
}
