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

#include "qtraj/io.hpp"

#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

namespace qtraj {

namespace {

Complex complex_from_json(const Json& j, const std::string& where) {
    if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number()) {
        throw SchemaError(where + ": expected a [re, im] pair of numbers");
    }
    return {j[0].get<double>(), j[1].get<double>()};
}

Json complex_to_json(Complex z) {
    return Json::array({z.real(), z.imag()});
}

const Json& require_field(const Json& j, const char* key) {
    if (!j.is_object() || !j.contains(key)) {
        throw SchemaError(std::string("missing field \"") + key + "\"");
    }
    return j.at(key);
}

}  // namespace

Json matrix_to_json(const Matrix& m) {
    Json rows = Json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        Json row = Json::array();
        for (Eigen::Index c = 0; c < m.cols(); ++c) {
            row.push_back(complex_to_json(m(r, c)));
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

Matrix matrix_from_json(const Json& j, const std::string& where) {
    if (!j.is_array() || j.empty()) {
        throw SchemaError(where + ": expected a nonempty array of rows");
    }
    const std::size_t rows = j.size();
    if (!j[0].is_array() || j[0].empty()) {
        throw SchemaError(where + ": row 0 is not a nonempty array");
    }
    const std::size_t cols = j[0].size();
    Matrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    for (std::size_t r = 0; r < rows; ++r) {
        if (!j[r].is_array() || j[r].size() != cols) {
            throw SchemaError(where + ": row " + std::to_string(r) + " has the wrong length");
        }
        for (std::size_t c = 0; c < cols; ++c) {
            m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
                complex_from_json(j[r][c], where + "[" + std::to_string(r) + "][" + std::to_string(c) + "]");
        }
    }
    return m;
}

Json instrument_to_json(const KrausInstrument& ins) {
    Json j;
    j["d"] = ins.dim();
    j["k"] = ins.outcomes();
    Json ops = Json::array();
    for (const Matrix& a : ins.operators()) {
        ops.push_back(matrix_to_json(a));
    }
    j["kraus"] = std::move(ops);
    return j;
}

std::vector<Matrix> instrument_operators_from_json(const Json& j) {
    const Json& jd = require_field(j, "d");
    const Json& jk = require_field(j, "k");
    const Json& jops = require_field(j, "kraus");
    if (!jd.is_number_integer() || !jk.is_number_integer()) {
        throw SchemaError("\"d\" and \"k\" must be integers");
    }
    const long long d = jd.get<long long>();
    const long long k = jk.get<long long>();
    if (d < 1 || k < 1) {
        throw SchemaError("\"d\" and \"k\" must be positive");
    }
    if (!jops.is_array() || static_cast<long long>(jops.size()) != k) {
        throw SchemaError("\"kraus\" must be an array of k operators");
    }
    std::vector<Matrix> ops;
    ops.reserve(static_cast<std::size_t>(k));
    for (std::size_t i = 0; i < jops.size(); ++i) {
        Matrix a = matrix_from_json(jops[i], "kraus[" + std::to_string(i) + "]");
        if (a.rows() != d || a.cols() != d) {
            throw SchemaError("kraus[" + std::to_string(i) + "] is not d x d");
        }
        ops.push_back(std::move(a));
    }
    return ops;
}

Json parse_json(const std::string& text) {
    return Json::parse(text);
}

Json read_json_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw SchemaError("cannot open " + path);
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_json(buf.str());
}

Projection projection_from_json(const Json& j) {
    const Json& body = j.is_object() ? require_field(j, "p") : j;
    return Projection(matrix_from_json(body, "p"));
}

void write_path_jsonl(std::ostream& os, const PathRecord& path, bool dump_states) {
    const int d = path.states.front().dim();
    for (int n = 1; n <= path.steps(); ++n) {
        const DensityMatrix& rho = path.states[static_cast<std::size_t>(n)];
        const std::vector<double> mom = moment_traces(rho, d);
        Json row;
        row["n"] = n;
        row["outcome"] = path.word[static_cast<std::size_t>(n - 1)];
        row["prob"] = path.step_probs[static_cast<std::size_t>(n - 1)];
        row["purity"] = mom.size() > 1 ? mom[1] : mom[0];
        row["moments"] = mom;
        if (dump_states) {
            row["state"] = matrix_to_json(rho.matrix());
        }
        os << row.dump() << '\n';
    }
}

void write_moment_csv(std::ostream& os, const PathRecord& path, int m_max) {
    os << "n";
    for (int m = 1; m <= m_max; ++m) {
        os << ",m" << m;
    }
    os << '\n';
    os << std::setprecision(17);
    for (std::size_t n = 0; n < path.states.size(); ++n) {
        os << n;
        for (double v : moment_traces(path.states[n], m_max)) {
            os << ',' << v;
        }
        os << '\n';
    }
}

Json purification_to_json(const PurificationReport& rep) {
    Json j;
    j["classification"] = to_string(rep.classification);
    j["n_reached"] = rep.n_reached ? Json(*rep.n_reached) : Json(nullptr);
    j["final_moments"] = rep.final_moments;
    j["delta2_tail"] = rep.delta2_tail;
    return j;
}

Json dark_projection_to_json(const DarkProjection& dp) {
    Json j;
    j["rank"] = dp.p.rank();
    j["scalars"] = dp.scalars;
    j["verified_depth"] = dp.verified_depth;
    j["p"] = matrix_to_json(dp.p.matrix());
    return j;
}

Json verify_result_to_json(const VerifyResult& vr) {
    Json j;
    j["status"] = to_string(vr.status);
    j["note"] = vr.note;
    j["closure_complete"] = vr.closure_complete;
    j["span_certificate"] = vr.span_certificate;
    if (vr.projection) {
        j["projection"] = dark_projection_to_json(*vr.projection);
    }
    Json fam = Json::array();
    for (const Projection& q : vr.closure) {
        fam.push_back(matrix_to_json(q.matrix()));
    }
    j["closure"] = std::move(fam);
    if (vr.counterexample) {
        j["counterexample"] = {{"word", vr.counterexample->word}, {"residual", vr.counterexample->residual}};
    }
    return j;
}

Json detection_to_json(const DetectionResult& det) {
    Json j;
    j["found"] = det.projection.has_value();
    j["plateaued"] = det.plateaued;
    j["note"] = det.note;
    if (det.verification) {
        j["verification"] = verify_result_to_json(*det.verification);
    }
    return j;
}

Json dichotomy_to_json(const DichotomyReport& rep) {
    Json j;
    j["alternative"] = to_string(rep.alternative);
    j["note"] = rep.note;
    j["purifies"] = rep.purifies;
    j["non_purifying"] = rep.non_purifying;
    j["undecided"] = rep.undecided;
    if (rep.detection) {
        j["detection"] = detection_to_json(*rep.detection);
    }
    Json traj = Json::array();
    for (const PurificationReport& pr : rep.trajectories) {
        traj.push_back(purification_to_json(pr));
    }
    j["trajectories"] = std::move(traj);
    return j;
}

}  // namespace qtraj
