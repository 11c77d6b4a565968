//! Frame and scene file formats.
//!
//! Frames are JSON documents
//! `{"frame_id": "...", "points": [{"label": "R", "x": 1.0, "y": 3.29}, ...]}`
//! or CSV with a `label,x,y` header. Scenes bundle labeled 3D points with the
//! two camera models so ambiguity constructions can be replayed.

use std::path::Path;

use serde::{Deserialize, Serialize};

use rigidview::geometry::{Point2, Point3};
use rigidview::scene::{CameraModel, GeneralPositionCertificate, RigidScene};
use rigidview::{Error, LabeledFrame, Result};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FramePointRecord {
    pub label: String,
    pub x: f64,
    pub y: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FrameFile {
    pub frame_id: String,
    pub points: Vec<FramePointRecord>,
}

impl FrameFile {
    pub fn from_frame(frame: &LabeledFrame) -> Self {
        Self {
            frame_id: frame.id.clone(),
            points: frame
                .iter()
                .map(|(label, p)| FramePointRecord {
                    label: label.to_string(),
                    x: p.x,
                    y: p.y,
                })
                .collect(),
        }
    }

    pub fn into_frame(self) -> Result<LabeledFrame> {
        LabeledFrame::from_points(
            self.frame_id,
            self.points
                .into_iter()
                .map(|r| (r.label, Point2::new(r.x, r.y))),
        )
    }
}

fn parse_error(path: &Path, message: impl std::fmt::Display) -> Error {
    Error::InvalidInput(format!("{}: {message}", path.display()))
}

/// Reads a frame from JSON, or from CSV when the extension is `.csv`.
pub fn read_frame(path: &Path) -> Result<LabeledFrame> {
    let text = std::fs::read_to_string(path).map_err(|e| parse_error(path, e))?;
    if path
        .extension()
        .is_some_and(|e| e.eq_ignore_ascii_case("csv"))
    {
        read_csv_frame(path, &text)
    } else {
        let file: FrameFile = serde_json::from_str(&text).map_err(|e| parse_error(path, e))?;
        file.into_frame()
    }
}

fn read_csv_frame(path: &Path, text: &str) -> Result<LabeledFrame> {
    let mut frame = LabeledFrame::new(
        path.file_stem()
            .map_or_else(|| "frame".to_string(), |s| s.to_string_lossy().into_owned()),
    );
    let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty());
    match lines.next() {
        Some(header) if header.to_ascii_lowercase().replace(' ', "") == "label,x,y" => {}
        _ => return Err(parse_error(path, "expected header 'label,x,y'")),
    }
    for (number, line) in lines.enumerate() {
        let mut fields = line.split(',').map(str::trim);
        let (Some(label), Some(x), Some(y), None) =
            (fields.next(), fields.next(), fields.next(), fields.next())
        else {
            return Err(parse_error(
                path,
                format!("row {}: expected 3 fields", number + 2),
            ));
        };
        let x: f64 = x
            .parse()
            .map_err(|e| parse_error(path, format!("row {}: {e}", number + 2)))?;
        let y: f64 = y
            .parse()
            .map_err(|e| parse_error(path, format!("row {}: {e}", number + 2)))?;
        frame.insert(label, Point2::new(x, y))?;
    }
    Ok(frame)
}

pub fn write_frame(path: &Path, frame: &LabeledFrame) -> Result<()> {
    let file = FrameFile::from_frame(frame);
    let text = serde_json::to_string_pretty(&file).map_err(|e| parse_error(path, e))?;
    std::fs::write(path, text + "\n").map_err(|e| parse_error(path, e))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScenePointRecord {
    pub label: String,
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SceneFile {
    pub points: Vec<ScenePointRecord>,
    pub camera1: CameraModel,
    pub camera2: CameraModel,
    #[serde(default)]
    pub certificate: GeneralPositionCertificate,
}

impl SceneFile {
    pub fn from_scene(scene: &RigidScene, camera1: &CameraModel, camera2: &CameraModel) -> Self {
        Self {
            points: scene
                .iter()
                .map(|(label, p)| ScenePointRecord {
                    label: label.to_string(),
                    x: p.x,
                    y: p.y,
                    z: p.z,
                })
                .collect(),
            camera1: *camera1,
            camera2: *camera2,
            certificate: scene.certificate,
        }
    }

    pub fn into_scene(self) -> Result<(RigidScene, CameraModel, CameraModel)> {
        let mut scene = RigidScene::from_points(
            self.points
                .into_iter()
                .map(|r| (r.label, Point3::new(r.x, r.y, r.z))),
        )?;
        scene.certificate = self.certificate;
        Ok((scene, self.camera1, self.camera2))
    }
}

pub fn read_scene(path: &Path) -> Result<(RigidScene, CameraModel, CameraModel)> {
    let text = std::fs::read_to_string(path).map_err(|e| parse_error(path, e))?;
    let file: SceneFile = serde_json::from_str(&text).map_err(|e| parse_error(path, e))?;
    file.into_scene()
}

pub fn write_scene(
    path: &Path,
    scene: &RigidScene,
    camera1: &CameraModel,
    camera2: &CameraModel,
) -> Result<()> {
    let file = SceneFile::from_scene(scene, camera1, camera2);
    let text = serde_json::to_string_pretty(&file).map_err(|e| parse_error(path, e))?;
    std::fs::write(path, text + "\n").map_err(|e| parse_error(path, e))
}
