use serde::{Deserialize, Serialize};

/// What a pointer references.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EntityKind {
    Face,
    Edge,
    BasePlane,
}

/// Reference to a face, edge or base plane of the solid a step consumes.
///
/// `step_index` is the index of the step whose input solid holds the entity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct EntityRef {
    pub step_index: u32,
    pub kind: EntityKind,
    pub stable_id: u64,
}

impl EntityRef {
    pub fn face(step_index: u32, stable_id: u64) -> Self {
        Self { step_index, kind: EntityKind::Face, stable_id }
    }

    pub fn edge(step_index: u32, stable_id: u64) -> Self {
        Self { step_index, kind: EntityKind::Edge, stable_id }
    }

    pub fn base_plane(step_index: u32, plane: BasePlane) -> Self {
        Self { step_index, kind: EntityKind::BasePlane, stable_id: plane.stable_id() }
    }
}

/// The three world planes that are always selectable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum BasePlane {
    Right,
    Front,
    Top,
}

impl BasePlane {
    pub const ALL: [BasePlane; 3] = [BasePlane::Right, BasePlane::Front, BasePlane::Top];

    pub fn stable_id(self) -> u64 {
        match self {
            BasePlane::Right => 0,
            BasePlane::Front => 1,
            BasePlane::Top => 2,
        }
    }

    pub fn from_stable_id(id: u64) -> Option<Self> {
        match id {
            0 => Some(BasePlane::Right),
            1 => Some(BasePlane::Front),
            2 => Some(BasePlane::Top),
            _ => None,
        }
    }

    /// Unit normal; the plane passes through the world origin.
    pub fn normal(self) -> [f64; 3] {
        match self {
            BasePlane::Right => [1.0, 0.0, 0.0],
            BasePlane::Front => [0.0, 1.0, 0.0],
            BasePlane::Top => [0.0, 0.0, 1.0],
        }
    }
}

/// A sketch point, optionally snapped onto an edge or base-plane trace.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub snap: Option<EntityRef>,
}

impl Point2 {
    pub fn new(x: f64, y: f64) -> Self {
        Self { x, y, snap: None }
    }

    pub fn snapped(x: f64, y: f64, target: EntityRef) -> Self {
        Self { x, y, snap: Some(target) }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Orientation {
    Clockwise,
    CounterClockwise,
}

/// A sketch primitive. Lines and arcs only carry their start point: the end is
/// the start of the next curve in the loop.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Curve {
    Line { start: Point2 },
    /// `sweep` in degrees.
    Arc { start: Point2, sweep: f64, orientation: Orientation },
    Circle { center: Point2, radius: f64 },
}

impl Curve {
    pub fn anchor(&self) -> &Point2 {
        match self {
            Curve::Line { start } | Curve::Arc { start, .. } => start,
            Curve::Circle { center, .. } => center,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Loop {
    pub curves: Vec<Curve>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Profile {
    pub loops: Vec<Loop>,
}

/// World direction symbol of a sketch frame.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Direction {
    #[serde(rename = "X+")]
    XPos,
    #[serde(rename = "X-")]
    XNeg,
    #[serde(rename = "Y+")]
    YPos,
    #[serde(rename = "Y-")]
    YNeg,
    #[serde(rename = "Z+")]
    ZPos,
    #[serde(rename = "Z-")]
    ZNeg,
}

impl Direction {
    pub const ALL: [Direction; 6] = [
        Direction::XPos,
        Direction::XNeg,
        Direction::YPos,
        Direction::YNeg,
        Direction::ZPos,
        Direction::ZNeg,
    ];

    /// Primary world direction `n`.
    pub fn primary(self) -> [f64; 3] {
        match self {
            Direction::XPos => [1.0, 0.0, 0.0],
            Direction::XNeg => [-1.0, 0.0, 0.0],
            Direction::YPos => [0.0, 1.0, 0.0],
            Direction::YNeg => [0.0, -1.0, 0.0],
            Direction::ZPos => [0.0, 0.0, 1.0],
            Direction::ZNeg => [0.0, 0.0, -1.0],
        }
    }

    /// Auxiliary direction `d` that fixes the in-plane x axis.
    pub fn auxiliary(self) -> [f64; 3] {
        match self {
            Direction::XPos => [0.0, 1.0, 0.0],
            Direction::XNeg => [0.0, 0.0, 1.0],
            Direction::YPos => [0.0, 0.0, 1.0],
            Direction::YNeg => [1.0, 0.0, 0.0],
            Direction::ZPos => [1.0, 0.0, 0.0],
            Direction::ZNeg => [0.0, 1.0, 0.0],
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Direction::XPos => "X+",
            Direction::XNeg => "X-",
            Direction::YPos => "Y+",
            Direction::YNeg => "Y-",
            Direction::ZPos => "Z+",
            Direction::ZNeg => "Z-",
        }
    }
}

/// How the sketch frame is placed on its target plane. Angles in degrees.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrameSpec {
    pub dr: Direction,
    pub origin_hint: Point2,
    pub rotation: f64,
    pub scale: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sketch {
    pub plane: EntityRef,
    pub frame: FrameSpec,
    pub profiles: Vec<Profile>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BooleanOp {
    New,
    Join,
    Cut,
    Intersect,
}

impl BooleanOp {
    pub const ALL: [BooleanOp; 4] = [BooleanOp::New, BooleanOp::Join, BooleanOp::Cut, BooleanOp::Intersect];
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Extrude {
    pub e_p: f64,
    pub e_n: f64,
    pub op: BooleanOp,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case")]
pub enum Operation {
    Epart { sketches: Vec<Sketch>, extrude: Extrude },
    Chamfer { distance: f64, edges: Vec<EntityRef> },
    Fillet { radius: f64, edges: Vec<EntityRef> },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Terminator {
    EndOfStep,
    EndOfModel,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Step {
    #[serde(flatten)]
    pub op: Operation,
    pub terminator: Terminator,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Program {
    pub steps: Vec<Step>,
}

impl Program {
    /// Visits every point of the program in token order.
    pub fn points(&self) -> Vec<&Point2> {
        let mut out = Vec::new();
        for step in &self.steps {
            if let Operation::Epart { sketches, .. } = &step.op {
                for sketch in sketches {
                    out.push(&sketch.frame.origin_hint);
                    for profile in &sketch.profiles {
                        for lp in &profile.loops {
                            for c in &lp.curves {
                                out.push(c.anchor());
                            }
                        }
                    }
                }
            }
        }
        out
    }

    /// All linear (`nv`) values other than frame scales, in token order.
    pub fn linear_values(&self) -> Vec<f64> {
        let mut out = Vec::new();
        for step in &self.steps {
            match &step.op {
                Operation::Epart { sketches, extrude } => {
                    for sketch in sketches {
                        let o = &sketch.frame.origin_hint;
                        out.extend([o.x, o.y]);
                        for profile in &sketch.profiles {
                            for lp in &profile.loops {
                                for c in &lp.curves {
                                    let p = c.anchor();
                                    out.extend([p.x, p.y]);
                                    if let Curve::Circle { radius, .. } = c {
                                        out.push(*radius);
                                    }
                                }
                            }
                        }
                    }
                    out.extend([extrude.e_p, extrude.e_n]);
                }
                Operation::Chamfer { distance, .. } => out.push(*distance),
                Operation::Fillet { radius, .. } => out.push(*radius),
            }
        }
        out
    }
}
