#pragma once

// Binary matrix container and checkpoint bundle I/O.
//
// Binary layout (`SEEDMAT1`), little-endian, no padding:
//   bytes 0..7   magic "SEEDMAT1"
//   bytes 8..11  rows  (uint32)
//   bytes 12..15 cols  (uint32)
//   then rows*cols float32 values, row-major
//
// A header-less CSV fallback (comma-separated floats, one row per line) is
// accepted anywhere a matrix file is expected; detection is by the magic
// bytes alone, never by file name.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "seed/matrix.hpp"

namespace seed {

inline constexpr char kMatrixMagic[8] = {'S', 'E', 'E', 'D', 'M', 'A', 'T', '1'};

void write_matrix(const DenseMatrix& m, std::ostream& out);
DenseMatrix read_matrix(std::istream& in);
DenseMatrix read_csv_matrix(std::istream& in);

void save_matrix(const DenseMatrix& m, const std::filesystem::path& path);

/// Loads either format: binary when the stream starts with the magic bytes,
/// CSV otherwise.
DenseMatrix load_matrix(const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// Checkpoint bundles
// ---------------------------------------------------------------------------

/// Gradient features captured at one training checkpoint: the training pool
/// plus one matrix per named target set, all sharing the channel dimension.
struct CheckpointGradients {
    std::int64_t step_id = 0;
    double learning_rate = 0.0;
    DenseMatrix train;                   // N x C
    std::vector<DenseMatrix> targets;    // aligned with CheckpointBundle::target_names
};

struct CheckpointBundle {
    std::vector<CheckpointGradients> checkpoints;
    std::size_t train_count = 0;    // N
    std::size_t channel_count = 0;  // C
    std::vector<std::string> target_names;  // sorted; index matches targets[]

    int target_index(const std::string& name) const;  // -1 when absent
    std::size_t target_rows(std::size_t index) const;
};

/// Validates cross-checkpoint shape agreement and fills the cached counts.
/// Target order is canonicalized by sorting names.
void finalize_bundle(CheckpointBundle& bundle);

/// Manifest schema:
/// {"checkpoints":[{"step_id":int,"learning_rate":float,"train":"path",
///                  "targets":{"name":"path",...}}, ...]}
/// Relative paths resolve against base_dir.
CheckpointBundle read_bundle(std::istream& manifest, const std::filesystem::path& base_dir);
CheckpointBundle read_bundle(const std::filesystem::path& manifest_path);

/// Writes matrices plus a manifest.json into dir; returns the manifest path.
std::filesystem::path write_bundle(const CheckpointBundle& bundle,
                                   const std::filesystem::path& dir);

}  // namespace seed
