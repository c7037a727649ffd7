#pragma once

#include <string>
#include <string_view>

#include "sgwr/model.hpp"

namespace sgwr {

inline constexpr int kSnapshotFormatVersion = 1;

/// Canonical text document (JSON, sorted keys, shortest round-trip reals).
/// Equal models always produce identical bytes.
std::string save_snapshot(const Model& model);

/// Rebuilds a model bit-exactly. Throws VersionError for other format versions,
/// InvariantError naming the violated invariant, FormatError for corrupt documents.
Model load_snapshot(std::string_view text);

void save_snapshot_file(const std::string& path, const Model& model);
Model load_snapshot_file(const std::string& path);

/// Throws InvariantError when the model breaks a structural invariant.
void validate_model(const Model& model);

}  // namespace sgwr
