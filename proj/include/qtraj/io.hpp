// Copyright 2026 The qtraj Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// JSON / JSON Lines / CSV encodings of instruments, paths and reports.
//
// Complex numbers are [re, im] pairs; matrices are arrays of rows.
// Instrument documents look like
//   {"d": 2, "k": 2, "kraus": [ [[[re, im], ...], ...], ... ]}

#pragma once

#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "qtraj/darkspace.hpp"
#include "qtraj/diagnostics.hpp"
#include "qtraj/dichotomy.hpp"
#include "qtraj/instrument.hpp"
#include "qtraj/trajectory.hpp"

namespace qtraj {

using Json = nlohmann::ordered_json;

/// Document does not match the expected shape.
class SchemaError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

Json matrix_to_json(const Matrix& m);
Matrix matrix_from_json(const Json& j, const std::string& where);

Json instrument_to_json(const KrausInstrument& ins);

/// Parses the operator list without checking completeness.
std::vector<Matrix> instrument_operators_from_json(const Json& j);

/// Parses text; nlohmann::json::parse_error carries the byte position.
Json parse_json(const std::string& text);

/// Reads and parses a file; throws SchemaError if it cannot be opened.
Json read_json_file(const std::string& path);

/// Parses a projection document: either {"p": matrix} or a bare matrix.
Projection projection_from_json(const Json& j);

/// One JSON object per step:
///   {"n", "outcome", "prob", "purity", "moments"[, "state"]}, n = 1..N.
void write_path_jsonl(std::ostream& os, const PathRecord& path, bool dump_states);

/// CSV with header n,m1..m_{m_max}; one row per state, n = 0..N.
void write_moment_csv(std::ostream& os, const PathRecord& path, int m_max);

Json purification_to_json(const PurificationReport& rep);
Json dark_projection_to_json(const DarkProjection& dp);
Json verify_result_to_json(const VerifyResult& vr);
Json detection_to_json(const DetectionResult& det);
Json dichotomy_to_json(const DichotomyReport& rep);

}  // namespace qtraj
