//! Passage times, geodesics and exit times by dynamic programming.
//!
//! A path weight includes both endpoint weights. Sites that cannot be reached
//! from the source are `None` in every table; no infinity ever enters the
//! arithmetic.

use crate::environment::{cone_window, BoundaryProfile, PointToLineModel, Variant, WeightField};
use crate::error::{LppError, Result};
use crate::lattice::{Point, Window};
use crate::shape::CharacteristicSpec;

/// Longest path (in steps) that [`brute_force_passage`] will enumerate.
pub const BRUTE_FORCE_MAX_STEPS: u64 = 24;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Source {
    /// Paths start at a point.
    Point(Point),
    /// Paths start anywhere on `x + y = 0`, offset by the profile `T`.
    Line,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    /// `value(w) = G(source, w)`.
    Forward,
    /// `value(w) = G(w, target)`.
    Backward,
}

/// Dense DP values over a rectangle.
#[derive(Clone, Debug)]
pub struct PassageTable<'a> {
    field: &'a WeightField,
    profile: Option<&'a BoundaryProfile>,
    source: Source,
    direction: Direction,
    window: Window,
    values: Vec<Option<f64>>,
}

impl<'a> PassageTable<'a> {
    pub fn field(&self) -> &'a WeightField {
        self.field
    }

    pub fn profile(&self) -> Option<&'a BoundaryProfile> {
        self.profile
    }

    pub fn source(&self) -> Source {
        self.source
    }

    pub fn direction(&self) -> Direction {
        self.direction
    }

    pub fn window(&self) -> &Window {
        &self.window
    }

    /// DP value at `p`, or `None` when `p` is outside the table or unreachable.
    pub fn get(&self, p: Point) -> Option<f64> {
        if self.window.contains(p) {
            self.values[self.window.index(p)]
        } else {
            None
        }
    }
}

/// Ordered up-right lattice path.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GeodesicPath {
    pub points: Vec<Point>,
}

impl GeodesicPath {
    pub fn start(&self) -> Point {
        self.points[0]
    }

    pub fn end(&self) -> Point {
        *self.points.last().expect("geodesic paths are nonempty")
    }

    /// Sum of the field's weights along the path.
    pub fn weight(&self, field: &WeightField) -> f64 {
        self.points.iter().map(|&p| field.at(p)).sum()
    }

    pub fn is_up_right(&self) -> bool {
        self.points.windows(2).all(|w| w[1] == w[0].step_x() || w[1] == w[0].step_y())
    }

    /// Signed coordinate of the last site on the axes through `origin`,
    /// other than `origin` itself: positive on the horizontal axis, negative
    /// on the vertical one. `None` if the path reaches no such site.
    pub fn last_axis_meeting(&self, origin: Point) -> Option<i64> {
        let p = *self.points.iter().rev().find(|p| p.x == origin.x || p.y == origin.y)?;
        if p == origin {
            None
        } else if p.y == origin.y {
            Some(p.x - origin.x)
        } else {
            Some(-(p.y - origin.y))
        }
    }
}

/// Exit time of the stationary geodesic and the value that attains it.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ExitRecord {
    /// Signed exit coordinate: positive on the x-axis, negative on the y-axis.
    pub z: i64,
    /// `max_x { G_stat(x) + G(x_up, v_N) }`, equal to `G_stat(v_N)`.
    pub value: f64,
    /// The axis site the geodesic leaves from.
    pub argmax_point: Point,
}

#[inline]
fn max_opt(a: Option<f64>, b: Option<f64>) -> Option<f64> {
    match (a, b) {
        (Some(a), Some(b)) => Some(if a >= b { a } else { b }),
        (a, None) => a,
        (None, b) => b,
    }
}

/// Row-by-row forward sweep over `rect` keeping two rows in memory.
///
/// `cell(p, best)` receives the better of the values at `p - e1` and
/// `p - e2` (`None` outside `rect` or unreachable) and returns the value at
/// `p`. `row(y, values)` observes each finished row.
fn sweep_forward(
    rect: Window,
    mut cell: impl FnMut(Point, Option<f64>) -> Option<f64>,
    mut row: impl FnMut(i64, &[Option<f64>]),
) {
    let w = rect.width();
    let mut below = vec![None; w];
    let mut cur = vec![None; w];
    for y in rect.min.y..=rect.max.y {
        let mut left = None;
        for (i, slot) in cur.iter_mut().enumerate() {
            let p = Point::new(rect.min.x + i as i64, y);
            let v = cell(p, max_opt(left, below[i]));
            *slot = v;
            left = v;
        }
        row(y, &cur);
        std::mem::swap(&mut below, &mut cur);
    }
}

/// Mirror image of [`sweep_forward`]: rows from the top, sites right to left,
/// with successors `p + e1` and `p + e2`. Rows are reported indexed by
/// `x - rect.min.x`.
fn sweep_backward(
    rect: Window,
    mut cell: impl FnMut(Point, Option<f64>) -> Option<f64>,
    mut row: impl FnMut(i64, &[Option<f64>]),
) {
    let w = rect.width();
    let mut above = vec![None; w];
    let mut cur = vec![None; w];
    for y in (rect.min.y..=rect.max.y).rev() {
        let mut right = None;
        for i in (0..w).rev() {
            let p = Point::new(rect.min.x + i as i64, y);
            let v = cell(p, max_opt(right, above[i]));
            cur[i] = v;
            right = v;
        }
        row(y, &cur);
        std::mem::swap(&mut above, &mut cur);
    }
}

fn point_cell(field: &WeightField, source: Point) -> impl Fn(Point, Option<f64>) -> Option<f64> + '_ {
    move |p, best| {
        if p == source {
            Some(field.at(p))
        } else {
            best.map(|b| b + field.at(p))
        }
    }
}

fn line_cell<'a>(
    field: &'a WeightField,
    profile: &'a BoundaryProfile,
) -> impl Fn(Point, Option<f64>) -> Option<f64> + 'a {
    move |p, best| match p.level() {
        l if l < 0 => None,
        0 => profile.get(p.x).map(|t| t + field.at(p)),
        _ => best.map(|b| b + field.at(p)),
    }
}

fn table_forward<'a>(
    field: &'a WeightField,
    profile: Option<&'a BoundaryProfile>,
    source: Source,
    rect: Window,
    cell: impl FnMut(Point, Option<f64>) -> Option<f64>,
) -> PassageTable<'a> {
    let mut values = vec![None; rect.cells() as usize];
    let w = rect.width();
    sweep_forward(rect, cell, |y, row| {
        let off = (y - rect.min.y) as usize * w;
        values[off..off + w].copy_from_slice(row);
    });
    PassageTable { field, profile, source, direction: Direction::Forward, window: rect, values }
}

fn check_pair(field: &WeightField, u: Point, v: Point) -> Result<()> {
    field.window().require(u)?;
    field.window().require(v)
}

/// `G(u, v)`: the maximal weight of an up-right path from `u` to `v`, both
/// endpoints included. `Ok(None)` stands for `-infinity` when `u` is not
/// below-left of `v`.
pub fn passage_point_to_point(field: &WeightField, u: Point, v: Point) -> Result<Option<f64>> {
    check_pair(field, u, v)?;
    if !u.le(v) {
        return Ok(None);
    }
    let rect = Window { min: u, max: v };
    let mut last = None;
    sweep_forward(rect, point_cell(field, u), |y, row| {
        if y == v.y {
            last = row[row.len() - 1];
        }
    });
    Ok(last)
}

/// Full forward table of `G(u, .)` over `[u, v]`.
pub fn forward_table(field: &WeightField, u: Point, v: Point) -> Result<PassageTable<'_>> {
    check_pair(field, u, v)?;
    if !u.le(v) {
        return Err(LppError::Unreachable(v));
    }
    let rect = Window { min: u, max: v };
    Ok(table_forward(field, None, Source::Point(u), rect, point_cell(field, u)))
}

/// Full backward table of `G(., v)` over `[lower, v]`.
pub fn backward_table(field: &WeightField, lower: Point, v: Point) -> Result<PassageTable<'_>> {
    check_pair(field, lower, v)?;
    if !lower.le(v) {
        return Err(LppError::Unreachable(lower));
    }
    let rect = Window { min: lower, max: v };
    let mut values = vec![None; rect.cells() as usize];
    let w = rect.width();
    sweep_backward(rect, point_cell(field, v), |y, row| {
        let off = (y - rect.min.y) as usize * w;
        values[off..off + w].copy_from_slice(row);
    });
    Ok(PassageTable {
        field,
        profile: None,
        source: Source::Point(v),
        direction: Direction::Backward,
        window: rect,
        values,
    })
}

/// Exhaustive maximum over all up-right paths from `u` to `v`.
///
/// Refuses paths longer than [`BRUTE_FORCE_MAX_STEPS`] steps.
pub fn brute_force_passage(field: &WeightField, u: Point, v: Point) -> Result<Option<f64>> {
    check_pair(field, u, v)?;
    if !u.le(v) {
        return Ok(None);
    }
    let steps = (v.x - u.x + v.y - u.y) as u64;
    if steps > BRUTE_FORCE_MAX_STEPS {
        return Err(LppError::TooLarge { steps, limit: BRUTE_FORCE_MAX_STEPS });
    }

    fn walk(field: &WeightField, p: Point, v: Point, acc: f64, best: &mut f64) {
        let acc = acc + field.at(p);
        if p == v {
            if acc > *best {
                *best = acc;
            }
            return;
        }
        if p.x < v.x {
            walk(field, p.step_x(), v, acc, best);
        }
        if p.y < v.y {
            walk(field, p.step_y(), v, acc, best);
        }
    }

    let mut best = f64::MIN;
    walk(field, u, v, 0.0, &mut best);
    Ok(Some(best))
}

fn require_stationary(field: &WeightField) -> Result<()> {
    match field.variant() {
        Variant::StationaryBoundary { .. } => Ok(()),
        other => Err(LppError::param(format!("expected a stationary boundary field, got {}", other.name()))),
    }
}

/// Stationary passage time `G_stat(v)` from the field's corner.
pub fn passage_stationary_boundary(field: &WeightField, v: Point) -> Result<f64> {
    require_stationary(field)?;
    field.window().require(v)?;
    passage_point_to_point(field, field.origin(), v)?.ok_or(LppError::Unreachable(v))
}

/// Forward table of `G_stat(.)` over `[origin, v]`.
pub fn stationary_table(field: &WeightField, v: Point) -> Result<PassageTable<'_>> {
    require_stationary(field)?;
    forward_table(field, field.origin(), v)
}

fn check_line(field: &WeightField, profile: &BoundaryProfile, v: Point) -> Result<Window> {
    if field.variant() != Variant::HalfPlane {
        return Err(LppError::param(format!("expected a half-plane field, got {}", field.variant().name())));
    }
    if v.level() <= 0 {
        return Err(LppError::param(format!("target {v} must satisfy x + y > 0")));
    }
    let cone = cone_window(v)?;
    if !field.window().contains_window(&cone) {
        return Err(LppError::param(format!("field window {} does not cover the cone {cone} of {v}", field.window())));
    }
    if !profile.covers(-v.y, v.x) {
        return Err(LppError::param(format!(
            "profile range [{}, {}] does not cover [{}, {}]",
            profile.t_min(),
            profile.t_max(),
            -v.y,
            v.x
        )));
    }
    Ok(cone)
}

/// `G_T(v) = max over u on x + y = 0 of T(u) + G(u, v)` in a half-plane field.
pub fn passage_point_to_line(field: &WeightField, profile: &BoundaryProfile, v: Point) -> Result<f64> {
    let cone = check_line(field, profile, v)?;
    let mut last = None;
    sweep_forward(cone, line_cell(field, profile), |y, row| {
        if y == v.y {
            last = row[row.len() - 1];
        }
    });
    last.ok_or(LppError::Unreachable(v))
}

/// Forward table of `G_T(.)` over the cone of `v`; sites below the line are `None`.
pub fn line_table<'a>(field: &'a WeightField, profile: &'a BoundaryProfile, v: Point) -> Result<PassageTable<'a>> {
    let cone = check_line(field, profile, v)?;
    Ok(table_forward(field, Some(profile), Source::Line, cone, line_cell(field, profile)))
}

/// Trace the maximizing path to `v` back through a forward table.
///
/// At each step the predecessor with the larger value wins; exact ties go to
/// `p - e1`.
pub fn backtrack_geodesic(table: &PassageTable<'_>, v: Point) -> Result<GeodesicPath> {
    if table.direction != Direction::Forward {
        return Err(LppError::param("geodesic backtracking needs a forward table"));
    }
    table.get(v).ok_or(LppError::Unreachable(v))?;
    let at_source = |p: Point| match table.source {
        Source::Point(u) => p == u,
        Source::Line => p.level() == 0,
    };
    let mut points = vec![v];
    let mut cur = v;
    while !at_source(cur) {
        let left = Point::new(cur.x - 1, cur.y);
        let down = Point::new(cur.x, cur.y - 1);
        cur = match (table.get(left), table.get(down)) {
            (Some(a), Some(b)) => {
                if a >= b {
                    left
                } else {
                    down
                }
            }
            (Some(_), None) => left,
            (None, Some(_)) => down,
            (None, None) => return Err(LppError::Unreachable(cur)),
        };
        points.push(cur);
    }
    points.reverse();
    Ok(GeodesicPath { points })
}

/// Exit time of the stationary geodesic from the field's corner to `v_N`.
///
/// One backward sweep over the interior computes `G(x_up, v_N)` for every
/// axis site; the exit site maximizes `G_stat(x) + G(x_up, v_N)`. Exact ties
/// go to the larger signed coordinate.
pub fn exit_time(field: &WeightField, spec: &CharacteristicSpec) -> Result<ExitRecord> {
    require_stationary(field)?;
    let o = field.origin();
    let rel = spec.v_n;
    if rel.x < 1 || rel.y < 1 {
        return Err(LppError::param(format!("v_N = {rel} has a zero coordinate")));
    }
    let target = Point::new(o.x + rel.x, o.y + rel.y);
    field.window().require(target)?;

    let (nx, ny) = (rel.x as usize, rel.y as usize);
    let interior = Window { min: Point::new(o.x + 1, o.y + 1), max: target };
    let mut bottom_row: Vec<f64> = Vec::new();
    let mut left_col = vec![0.0; ny];
    let mut missing = false;
    sweep_backward(interior, point_cell(field, target), |y, row| {
        let j = (y - o.y - 1) as usize;
        match row[0] {
            Some(v) => left_col[j] = v,
            None => missing = true,
        }
        if j == 0 {
            bottom_row = row.iter().map(|v| v.unwrap_or(f64::NAN)).collect();
        }
    });
    debug_assert!(!missing && bottom_row.len() == nx);

    let mut best: Option<(i64, f64)> = None;
    let mut consider = |z: i64, value: f64| {
        if best.is_none_or(|(_, b)| value >= b) {
            best = Some((z, value));
        }
    };
    // y-axis: z = -ny .. -1, ascending.
    let mut prefix_y = vec![0.0; ny + 1];
    let mut acc = field.at(o);
    for (j, slot) in prefix_y.iter_mut().enumerate().skip(1) {
        acc += field.at(Point::new(o.x, o.y + j as i64));
        *slot = acc;
    }
    for j in (1..=ny).rev() {
        consider(-(j as i64), prefix_y[j] + left_col[j - 1]);
    }
    let mut acc = field.at(o);
    for i in 1..=nx {
        acc += field.at(Point::new(o.x + i as i64, o.y));
        consider(i as i64, acc + bottom_row[i - 1]);
    }

    let (z, value) = best.expect("at least one axis candidate");
    let argmax_point = if z > 0 { Point::new(o.x + z, o.y) } else { Point::new(o.x, o.y - z) };
    Ok(ExitRecord { z, value, argmax_point })
}

/// Signed coordinate of the last axis site on the point-to-line stationary
/// geodesic to `v_N`.
pub fn q_last_axis_meeting(model: &PointToLineModel, spec: &CharacteristicSpec) -> Result<i64> {
    let v = spec.v_n;
    let table = line_table(&model.field, &model.profile, v)?;
    let path = backtrack_geodesic(&table, v)?;
    path.last_axis_meeting(Point::ORIGIN)
        .ok_or_else(|| LppError::Degenerate(format!("geodesic to {v} meets no axis site off the origin")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::environment::{build_bulk, build_stationary_boundary, Density, Seed};

    fn grid(w: i64, h: i64, weights: &[f64]) -> WeightField {
        let win = Window::from_origin(Point::new(w - 1, h - 1)).unwrap();
        WeightField::from_weights(Variant::Bulk, win, weights.to_vec()).unwrap()
    }

    fn two_by_two() -> WeightField {
        // Row-major from the bottom row: w(0,0)=1, w(1,0)=2, w(0,1)=3, w(1,1)=4.
        grid(2, 2, &[1.0, 2.0, 3.0, 4.0])
    }

    #[test]
    fn two_by_two_example() {
        let f = two_by_two();
        let (u, v) = (Point::ORIGIN, Point::new(1, 1));
        assert_eq!(passage_point_to_point(&f, u, v).unwrap(), Some(8.0));
        assert_eq!(brute_force_passage(&f, u, v).unwrap(), Some(8.0));
        let t = forward_table(&f, u, v).unwrap();
        let path = backtrack_geodesic(&t, v).unwrap();
        assert_eq!(path.points, vec![Point::new(0, 0), Point::new(0, 1), Point::new(1, 1)]);
        assert_eq!(path.weight(&f), 8.0);
    }

    #[test]
    fn single_point_and_unordered_pairs() {
        let f = two_by_two();
        let p = Point::new(1, 0);
        assert_eq!(passage_point_to_point(&f, p, p).unwrap(), Some(2.0));
        assert_eq!(passage_point_to_point(&f, Point::new(1, 0), Point::new(0, 1)).unwrap(), None);
        assert_eq!(brute_force_passage(&f, Point::new(1, 0), Point::new(0, 1)).unwrap(), None);
        assert!(passage_point_to_point(&f, Point::ORIGIN, Point::new(2, 2)).is_err());
    }

    #[test]
    fn strip_has_a_unique_path() {
        let w: Vec<f64> = (1..=9).map(|k| k as f64 * 0.5).collect();
        let f = grid(9, 1, &w);
        let v = Point::new(8, 0);
        let total: f64 = w.iter().sum();
        assert_eq!(passage_point_to_point(&f, Point::ORIGIN, v).unwrap(), Some(total));
        assert_eq!(brute_force_passage(&f, Point::ORIGIN, v).unwrap(), Some(total));
        let t = forward_table(&f, Point::ORIGIN, v).unwrap();
        let path = backtrack_geodesic(&t, v).unwrap();
        assert_eq!(path.points.len(), 9);
        assert!(path.points.iter().all(|p| p.y == 0));
    }

    #[test]
    fn brute_force_refuses_long_paths() {
        let f = build_bulk(Window::from_origin(Point::new(12, 12)).unwrap(), &Seed::new(1, "bf", 0)).unwrap();
        assert!(brute_force_passage(&f, Point::new(6, 6), Point::new(12, 12)).is_ok());
        let big = build_bulk(Window::from_origin(Point::new(13, 12)).unwrap(), &Seed::new(1, "bf", 0)).unwrap();
        assert!(matches!(
            brute_force_passage(&big, Point::ORIGIN, Point::new(13, 12)),
            Err(LppError::TooLarge { steps: 25, limit: 24 })
        ));
    }

    #[test]
    fn random_six_by_seven_matches_brute_force() {
        let win = Window::from_origin(Point::new(5, 6)).unwrap();
        for i in 0..20 {
            let f = build_bulk(win, &Seed::new(3, "p2p", i)).unwrap();
            let dp = passage_point_to_point(&f, win.min, win.max).unwrap().unwrap();
            let bf = brute_force_passage(&f, win.min, win.max).unwrap().unwrap();
            assert!((dp - bf).abs() <= 1e-9 * bf);
        }
    }

    #[test]
    fn stationary_axis_passage_is_a_partial_sum() {
        let f = build_stationary_boundary(400, Density::new(0.3).unwrap(), &Seed::new(5, "axis", 0)).unwrap();
        let v = Point::new(17, 0);
        let sum: f64 = (0..=17).map(|x| f.at(Point::new(x, 0))).sum();
        assert!((passage_stationary_boundary(&f, v).unwrap() - sum).abs() < 1e-12);
        assert_eq!(passage_stationary_boundary(&f, Point::ORIGIN).unwrap(), 0.0);
        assert!(passage_stationary_boundary(&f, Point::new(1000, 0)).is_err());
    }

    #[test]
    fn flat_profile_line_passage_on_a_tiny_cone() {
        // Target (1, 0): line sites (0,0) and (1,-1); cone [0,1] x [-1,0].
        let win = Window::new(Point::new(0, -1), Point::new(1, 0)).unwrap();
        // Sites (0,-1) level -1, (1,-1) level 0, (0,0) level 0, (1,0) level 1.
        let f = WeightField::from_weights(Variant::HalfPlane, win, vec![0.0, 0.0, 0.0, 2.5]).unwrap();
        let profile = BoundaryProfile::from_values(None, 0, vec![0.0, 1.5]).unwrap();
        // max(T(0) + 0 + 2.5, T(1) + 0 + 2.5) = 4.0.
        assert_eq!(passage_point_to_line(&f, &profile, Point::new(1, 0)).unwrap(), 4.0);
        let table = line_table(&f, &profile, Point::new(1, 0)).unwrap();
        let path = backtrack_geodesic(&table, Point::new(1, 0)).unwrap();
        assert_eq!(path.start(), Point::new(1, -1));
        // Profile not covering t = -0 .. 1 is rejected.
        let short = BoundaryProfile::zero(0, 0).unwrap();
        assert!(passage_point_to_line(&f, &short, Point::new(1, 0)).is_err());
    }

    #[test]
    fn exit_time_prefers_heavy_x_axis() {
        // 6x6 stationary instance: x-axis 10, y-axis 0.1, interior 1.
        let win = Window::from_origin(Point::new(5, 5)).unwrap();
        let weights = win
            .points()
            .map(|p| match (p.x, p.y) {
                (0, 0) => 0.0,
                (_, 0) => 10.0,
                (0, _) => 0.1,
                _ => 1.0,
            })
            .collect();
        let rho = Density::half();
        let f = WeightField::from_weights(Variant::StationaryBoundary { rho }, win, weights).unwrap();
        let spec = CharacteristicSpec { rho, n: 20, v_n: Point::new(5, 5) };
        let rec = exit_time(&f, &spec).unwrap();
        assert!(rec.z > 0);
        // Brute-force geodesic: run straight along the x-axis to x = 5 then up.
        let bf = brute_force_passage(&f, Point::ORIGIN, Point::new(5, 5)).unwrap().unwrap();
        assert_eq!(bf, 50.0 + 5.0);
        assert_eq!(rec.z, 5);
        assert_eq!(rec.value, bf);

        let mirrored = f.transpose();
        let rec2 = exit_time(&mirrored, &spec).unwrap();
        assert_eq!(rec2.z, -rec.z);
    }

    #[test]
    fn exit_time_rejects_degenerate_targets() {
        let rho = Density::half();
        let f = build_stationary_boundary(64, rho, &Seed::new(1, "deg", 0)).unwrap();
        let spec = CharacteristicSpec { rho, n: 64, v_n: Point::new(16, 0) };
        assert!(exit_time(&f, &spec).is_err());
        let bulk = build_bulk(*f.window(), &Seed::new(1, "deg", 0)).unwrap();
        let ok = CharacteristicSpec::new(rho, 64).unwrap();
        assert!(exit_time(&bulk, &ok).is_err());
    }

    #[test]
    fn exit_decomposition_and_geodesic_agree() {
        let rho = Density::new(0.4).unwrap();
        let spec = CharacteristicSpec::new(rho, 64).unwrap();
        for i in 0..50 {
            let f = build_stationary_boundary(64, rho, &Seed::new(11, "exit", i)).unwrap();
            let rec = exit_time(&f, &spec).unwrap();
            let g = passage_stationary_boundary(&f, spec.v_n).unwrap();
            assert!((rec.value - g).abs() <= 1e-9 * g);
            let t = stationary_table(&f, spec.v_n).unwrap();
            let path = backtrack_geodesic(&t, spec.v_n).unwrap();
            assert!(path.is_up_right());
            assert!((path.weight(&f) - g).abs() <= 1e-9 * g);
            assert_eq!(path.last_axis_meeting(Point::ORIGIN), Some(rec.z));
        }
    }

    #[test]
    fn backward_table_matches_point_to_point() {
        let win = Window::from_origin(Point::new(7, 5)).unwrap();
        let f = build_bulk(win, &Seed::new(2, "bwd", 0)).unwrap();
        let t = backward_table(&f, win.min, win.max).unwrap();
        for p in win.points() {
            let direct = passage_point_to_point(&f, p, win.max).unwrap().unwrap();
            assert!((t.get(p).unwrap() - direct).abs() <= 1e-12 * direct);
        }
        assert!(backtrack_geodesic(&t, win.max).is_err());
    }

    #[test]
    fn last_axis_meeting_conventions() {
        let path =
            GeodesicPath { points: vec![Point::new(0, 0), Point::new(0, 1), Point::new(0, 2), Point::new(1, 2)] };
        assert_eq!(path.last_axis_meeting(Point::ORIGIN), Some(-2));
        let flat = GeodesicPath { points: vec![Point::new(0, 0), Point::new(1, 1)] };
        assert_eq!(flat.last_axis_meeting(Point::ORIGIN), None);
    }
}
