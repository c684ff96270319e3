#ifndef MARRQ_MODEL_IO_HPP
#define MARRQ_MODEL_IO_HPP

#include <string>

#include "marrq/flow.hpp"

namespace marrq {

/// Network/tensor file format: a JSON manifest naming each module (name,
/// rows, cols, byte offset, activation) next to one binary blob of
/// little-endian IEEE-754 32-bit floats, row-major, in manifest order.
/// Calibration sets reuse the format with a one-entry manifest.
void save_network(const NetworkSpec& net, const std::string& manifest_path);
NetworkSpec load_network(const std::string& manifest_path);

void save_calibration(const CalibrationSet& calib, const std::string& manifest_path);
CalibrationSet load_calibration(const std::string& manifest_path);

/// Blob file name derived from the manifest path (extension swapped to .bin).
std::string blob_path_for(const std::string& manifest_path);

}  // namespace marrq

#endif
