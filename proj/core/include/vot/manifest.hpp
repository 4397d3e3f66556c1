#pragma once

#include <string>

#include "vot/data.hpp"

namespace vot::data {

/// Dataset manifest JSON: the generation spec plus, per sequence, its id,
/// seeds, start index, motion kind and intrinsics.
std::string manifest_to_json(const Dataset& dataset);

/// Parses a manifest written by manifest_to_json. Sample frames are not
/// loaded. Throws vot::ParseError on malformed JSON or unknown keys.
Dataset manifest_from_json(const std::string& text);

/// A DatasetSpec as JSON, for gen-data inputs. Missing keys keep their
/// defaults; unknown keys are rejected with vot::ConfigError.
DatasetSpec dataset_spec_from_json(const std::string& text);
std::string dataset_spec_to_json(const DatasetSpec& spec);

/// Writes `dir/manifest.json` and, per sequence, `dir/<id>/frames/<t>.pgm`
/// and `dir/<id>/gt.txt` (TUM ground truth, expressed relative to the
/// first frame so it starts at the identity).
void write_dataset(const Dataset& dataset, const std::string& dir);

/// Reads a directory written by write_dataset, loading frames and ground
/// truth from disk.
Dataset load_dataset(const std::string& dir);

/// Loads a single sequence by id from a dataset directory.
SequenceSample load_sequence(const std::string& dir, const std::string& id);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

}  // namespace vot::data
