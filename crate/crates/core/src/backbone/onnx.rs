//! Frozen trunks loaded from ONNX graphs.
//!
//! Graph contract: one float input `[N, 224, 224, 3]` (NHWC, already
//! preprocessed) and one float output `[N, 7, 7, C]`.

use std::fs;
use std::path::{Path, PathBuf};

use prost::Message;
use tract_onnx::pb;
use tract_onnx::pb::attribute_proto::AttributeType;
use tract_onnx::pb::tensor_proto::DataType;
use tract_onnx::pb::tensor_shape_proto::dimension::Value as DimValue;
use tract_onnx::prelude::*;

use super::spec::{BackboneSpec, FEATURE_GRID};
use super::tensor::{FeatureTensor, InputBatch};
use super::toy::{ToyBackbone, PATCH, POOL};
use super::Backbone;
use crate::error::{Error, Result};

type Plan = TypedRunnableModel<TypedModel>;

pub struct OnnxBackbone {
    spec: BackboneSpec,
    graph: PathBuf,
    plan: Plan,
}

impl std::fmt::Debug for OnnxBackbone {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("OnnxBackbone")
            .field("spec", &self.spec)
            .field("graph", &self.graph)
            .finish()
    }
}

fn tract_err(context: &str, e: impl std::fmt::Debug) -> Error {
    Error::Backbone(format!("{context}: {e:?}"))
}

/// Default-domain opset a graph was written against.
pub fn graph_opset(proto: &pb::ModelProto) -> Option<i64> {
    proto
        .opset_import
        .iter()
        .find(|o| o.domain.is_empty() || o.domain == "ai.onnx")
        .map(|o| o.version)
}

/// `foo/NAME.onnx` -> `foo/NAME.manifest.json`.
pub fn default_manifest_path(graph: &Path) -> PathBuf {
    let stem = graph.file_stem().map(|s| s.to_string_lossy().to_string()).unwrap_or_default();
    graph.with_file_name(format!("{stem}.manifest.json"))
}

/// Parses the graph, checks the pinned opset and probes it with a zero
/// input; the probe shape must equal the declared output shape.
pub fn load_backbone(graph: &Path, manifest: &Path) -> Result<OnnxBackbone> {
    let spec = BackboneSpec::load(manifest)?;
    let onnx = tract_onnx::onnx();
    let proto = onnx
        .proto_model_for_path(graph)
        .map_err(|e| tract_err(&format!("cannot parse {}", graph.display()), e))?;
    let pinned = spec.opset.ok_or_else(|| Error::Backbone("manifest does not pin an opset".into()))?;
    match graph_opset(&proto) {
        Some(v) if v == pinned => {}
        other => {
            return Err(Error::Backbone(format!(
                "graph opset {other:?} differs from manifest opset {pinned}"
            )))
        }
    }
    let side = spec.input_side as usize;
    let plan = onnx
        .model_for_proto_model(&proto)
        .and_then(|m| m.with_input_fact(0, f32::fact([1, side, side, 3]).into()))
        .and_then(|m| m.into_optimized())
        .and_then(|m| m.into_runnable())
        .map_err(|e| tract_err(&format!("cannot prepare {}", graph.display()), e))?;

    let backbone = OnnxBackbone {
        spec,
        graph: graph.to_path_buf(),
        plan,
    };
    let observed = backbone.run_one(&vec![0f32; side * side * 3])?.0;
    let declared = [1, backbone.spec.output_shape[0], backbone.spec.output_shape[1], backbone.spec.output_shape[2]];
    if observed != declared {
        return Err(Error::ShapeMismatch {
            declared: declared.to_vec(),
            observed,
        });
    }
    Ok(backbone)
}

impl OnnxBackbone {
    pub fn graph_path(&self) -> &Path {
        &self.graph
    }

    fn run_one(&self, image: &[f32]) -> Result<(Vec<usize>, Vec<f32>)> {
        let side = self.spec.input_side as usize;
        let input = tract_ndarray::Array4::from_shape_vec((1, side, side, 3), image.to_vec())
            .map_err(|e| tract_err("input shape", e))?;
        let outputs = self
            .plan
            .run(tvec!(Tensor::from(input).into()))
            .map_err(|e| tract_err(&format!("inference failed in {}", self.graph.display()), e))?;
        let out = outputs
            .first()
            .ok_or_else(|| Error::Backbone("graph produced no output".into()))?;
        let view = out
            .to_array_view::<f32>()
            .map_err(|e| tract_err("graph output is not f32", e))?;
        Ok((view.shape().to_vec(), view.iter().copied().collect()))
    }
}

impl Backbone for OnnxBackbone {
    fn spec(&self) -> &BackboneSpec {
        &self.spec
    }

    fn extract(&self, batch: &InputBatch) -> Result<FeatureTensor> {
        use rayon::prelude::*;
        let rows: Vec<Vec<f32>> = (0..batch.n)
            .into_par_iter()
            .map(|i| self.run_one(batch.image(i)).map(|(_, v)| v))
            .collect::<Result<_>>()?;
        let width = self.spec.flatten_size();
        let mut data = Vec::with_capacity(batch.n * width);
        for r in rows {
            if r.len() != width {
                return Err(Error::ShapeMismatch {
                    declared: vec![width],
                    observed: vec![r.len()],
                });
            }
            data.extend(r);
        }
        let features = FeatureTensor {
            batch: batch.n,
            shape: self.spec.output_shape,
            data,
        };
        features.check_finite()?;
        Ok(features)
    }
}

fn ints_attr(name: &str, values: &[i64]) -> pb::AttributeProto {
    pb::AttributeProto {
        name: name.to_string(),
        r#type: AttributeType::Ints as i32,
        ints: values.to_vec(),
        ..Default::default()
    }
}

fn node(op: &str, inputs: &[&str], output: &str, attrs: Vec<pb::AttributeProto>) -> pb::NodeProto {
    pb::NodeProto {
        input: inputs.iter().map(|s| s.to_string()).collect(),
        output: vec![output.to_string()],
        name: output.to_string(),
        op_type: op.to_string(),
        attribute: attrs,
        ..Default::default()
    }
}

fn value_info(name: &str, dims: &[Option<i64>]) -> pb::ValueInfoProto {
    let dim = dims
        .iter()
        .map(|d| pb::tensor_shape_proto::Dimension {
            value: Some(match d {
                Some(v) => DimValue::DimValue(*v),
                None => DimValue::DimParam("batch".into()),
            }),
            ..Default::default()
        })
        .collect();
    pb::ValueInfoProto {
        name: name.to_string(),
        r#type: Some(pb::TypeProto {
            value: Some(pb::type_proto::Value::TensorType(pb::type_proto::Tensor {
                elem_type: DataType::Float as i32,
                shape: Some(pb::TensorShapeProto { dim }),
            })),
            ..Default::default()
        }),
        ..Default::default()
    }
}

/// Encodes the toy trunk as an ONNX graph:
/// Transpose(NHWC->NCHW) -> AveragePool 8x8/8 -> Conv 4x4/4 (no bias) -> Transpose(NCHW->NHWC).
pub fn toy_model_proto(toy: &ToyBackbone) -> pb::ModelProto {
    let spec = toy.spec();
    let c = spec.channels() as i64;
    let side = spec.input_side as i64;
    let grid = FEATURE_GRID as i64;
    let kernel = pb::TensorProto {
        dims: vec![c, 3, PATCH as i64, PATCH as i64],
        data_type: DataType::Float as i32,
        name: "kernel".into(),
        float_data: toy.weights().to_vec(),
        ..Default::default()
    };
    let graph = pb::GraphProto {
        name: "toy-no-top".into(),
        node: vec![
            node("Transpose", &["input"], "nchw", vec![ints_attr("perm", &[0, 3, 1, 2])]),
            node(
                "AveragePool",
                &["nchw"],
                "pooled",
                vec![
                    ints_attr("kernel_shape", &[POOL as i64, POOL as i64]),
                    ints_attr("strides", &[POOL as i64, POOL as i64]),
                ],
            ),
            node(
                "Conv",
                &["pooled", "kernel"],
                "cells",
                vec![
                    ints_attr("kernel_shape", &[PATCH as i64, PATCH as i64]),
                    ints_attr("strides", &[PATCH as i64, PATCH as i64]),
                ],
            ),
            node("Transpose", &["cells"], "features", vec![ints_attr("perm", &[0, 2, 3, 1])]),
        ],
        initializer: vec![kernel],
        input: vec![value_info("input", &[None, Some(side), Some(side), Some(3)])],
        output: vec![value_info("features", &[None, Some(grid), Some(grid), Some(c)])],
        ..Default::default()
    };
    pb::ModelProto {
        ir_version: 7,
        opset_import: vec![pb::OperatorSetIdProto {
            domain: String::new(),
            version: spec.opset.unwrap_or(super::toy::TOY_OPSET),
        }],
        producer_name: "matrec".into(),
        graph: Some(graph),
        ..Default::default()
    }
}

/// Writes `DIR/toy.onnx` and `DIR/toy.manifest.json`.
pub fn export_toy(toy: &ToyBackbone, dir: &Path) -> Result<(PathBuf, PathBuf)> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let graph = dir.join("toy.onnx");
    let manifest = dir.join("toy.manifest.json");
    let bytes = toy_model_proto(toy).encode_to_vec();
    fs::write(&graph, bytes).map_err(|e| Error::io(&graph, e))?;
    toy.spec().save(&manifest)?;
    Ok((graph, manifest))
}
