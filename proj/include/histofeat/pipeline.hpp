#pragma once

#include <string>
#include <vector>

#include "histofeat/config.hpp"
#include "histofeat/report.hpp"
#include "histofeat/synthetic.hpp"

namespace histofeat {

// Subcommand bodies.  Each is a pure function of (config, inputs, seed) and
// returns the paths it wrote so callers and tests can chain them.

SyntheticOutputs cmd_gen_synthetic(const PipelineConfig& cfg);

// Full-network training on the source-domain class dataset; writes
// <out>/pretrained.ckpt.
std::string cmd_pretrain(const PipelineConfig& cfg);

// Two-step transfer on the target-domain class dataset starting from
// cfg.checkpoint_path; writes <out>/finetuned.ckpt.
std::string cmd_finetune(const PipelineConfig& cfg);

struct ExtractOutputs {
    std::string tile_features;      // binary feature file
    std::string tile_features_csv;
    std::string tile_labels_csv;    // class-dataset input only
    std::string patient_features;   // manifest input only
    std::string patient_features_csv;
};

// input: a class-dataset directory (tile features + labels) or a patient
// manifest csv (rescale -> stain normalize -> tile -> filter -> extract ->
// aggregate, emitting tile- and patient-level features).  Output files are
// named <out>/<stem>*.
ExtractOutputs cmd_extract(const PipelineConfig& cfg, const std::string& input,
                           const std::string& stem);

struct ExperimentOutputs {
    CVReport report;
    std::string report_json;
    std::vector<std::string> files;  // every csv/svg written, including the json
};

ExperimentOutputs cmd_experiment(const PipelineConfig& cfg, const std::string& which,
                                 const std::string& features_a, const std::string& features_b);

// Re-renders the csv/plot set from a saved report json.
ExperimentOutputs cmd_report(const PipelineConfig& cfg, const std::string& report_json);

}  // namespace histofeat
