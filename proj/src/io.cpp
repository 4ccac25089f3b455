// io.cpp — JSON encoding/decoding and file plumbing.

#include "ips/io.hpp"

#include <cstdint>
#include <ctime>
#include <fstream>
#include <sstream>

namespace ips::io {

using nlohmann::json;

// -------------------------------- matrices ----------------------------------

json matrix_to_json(const Matrix& m) {
    json rows = json::array();
    for (Index i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (Index j = 0; j < m.cols(); ++j) {
            row.push_back(json::array({m(i, j).real(), m(i, j).imag()}));
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

Matrix matrix_from_json(const json& j) {
    if (!j.is_array() || j.empty()) {
        throw ParseError("matrix: expected a non-empty array of rows");
    }
    const auto rows = static_cast<Index>(j.size());
    if (!j[0].is_array() || j[0].empty()) {
        throw ParseError("matrix: rows must be non-empty arrays");
    }
    const auto cols = static_cast<Index>(j[0].size());
    Matrix m(rows, cols);
    for (Index i = 0; i < rows; ++i) {
        const json& row = j[static_cast<size_t>(i)];
        if (!row.is_array() || static_cast<Index>(row.size()) != cols) {
            throw ParseError("matrix: ragged rows");
        }
        for (Index c = 0; c < cols; ++c) {
            const json& entry = row[static_cast<size_t>(c)];
            if (!entry.is_array() || entry.size() != 2 || !entry[0].is_number() ||
                !entry[1].is_number()) {
                throw ParseError("matrix: entries must be [re, im] pairs");
            }
            m(i, c) = Complex(entry[0].get<double>(), entry[1].get<double>());
        }
    }
    if (!all_finite(m)) {
        throw ParseError("matrix: non-finite entries");
    }
    return m;
}

// -------------------------------- channels ----------------------------------

ChannelFile channel_from_json(const json& j, const Tolerance& tol) {
    if (!j.is_object() || !j.contains("dim") || !j.contains("kraus")) {
        throw ParseError("channel: expected an object with 'dim' and 'kraus'");
    }
    if (!j["dim"].is_number_integer()) {
        throw ParseError("channel: 'dim' must be an integer");
    }
    const auto d = j["dim"].get<Index>();
    if (!j["kraus"].is_array() || j["kraus"].empty()) {
        throw ParseError("channel: 'kraus' must be a non-empty array of matrices");
    }
    std::vector<Matrix> ops;
    ops.reserve(j["kraus"].size());
    for (const json& k : j["kraus"]) {
        Matrix m = matrix_from_json(k);
        if (m.rows() != d || m.cols() != d) {
            throw ParseError("channel: Kraus matrix does not match 'dim'");
        }
        ops.push_back(std::move(m));
    }
    ChannelFile out{Channel::from_kraus(std::move(ops), tol),
                    j.value("label", std::string{})};
    return out;
}

json channel_to_json(const Channel& e, const std::string& label) {
    json j;
    j["dim"] = e.dim();
    if (!label.empty()) j["label"] = label;
    json kraus = json::array();
    for (const Matrix& k : e.kraus()) kraus.push_back(matrix_to_json(k));
    j["kraus"] = std::move(kraus);
    return j;
}

ChannelFile read_channel_file(const std::string& path, const Tolerance& tol) {
    json j;
    try {
        j = json::parse(read_text_file(path));
    } catch (const json::exception& ex) {
        throw ParseError(path + ": " + ex.what());
    }
    return channel_from_json(j, tol);
}

// ---------------------------------- codes -----------------------------------

Code code_from_json(const json& j, const Tolerance& tol) {
    if (!j.is_object() || !j.contains("dim") || !j.contains("basis")) {
        throw ParseError("code: expected an object with 'dim' and 'basis'");
    }
    const auto d = j["dim"].get<Index>();
    auto read_list = [&](const char* key) {
        std::vector<Matrix> out;
        if (!j.contains(key)) return out;
        if (!j[key].is_array()) {
            throw ParseError(std::string("code: '") + key + "' must be an array of matrices");
        }
        for (const json& m : j[key]) {
            Matrix mat = matrix_from_json(m);
            if (mat.rows() != d || mat.cols() != d) {
                throw ParseError(std::string("code: matrix in '") + key +
                                 "' does not match 'dim'");
            }
            out.push_back(std::move(mat));
        }
        return out;
    };
    std::vector<Matrix> basis = read_list("basis");
    std::vector<Matrix> samples = read_list("samples");
    if (samples.empty()) {
        throw ParseError("code: at least one sample state is required in 'samples'");
    }
    return Code::from_basis(d, basis, std::move(samples), tol);
}

Code read_code_file(const std::string& path, const Tolerance& tol) {
    json j;
    try {
        j = json::parse(read_text_file(path));
    } catch (const json::exception& ex) {
        throw ParseError(path + ": " + ex.what());
    }
    return code_from_json(j, tol);
}

// --------------------------------- reports ----------------------------------

namespace {

json tolerances_to_json(const Tolerance& tol) {
    return json{{"eig_cluster", tol.eig_cluster},
                {"rank_cutoff", tol.rank_cutoff},
                {"verify", tol.verify}};
}

}  // namespace

json report_to_json(const IpsReport& rep, const std::string& input_digest,
                    const std::string& label) {
    json j;
    j["mode"] = to_string(rep.mode);
    json shape = json::array();
    for (const auto& [dk, nk] : rep.shape) shape.push_back(json::array({dk, nk}));
    j["shape"] = std::move(shape);
    j["support_rank"] = rep.support_rank;
    j["fixed_dim"] = rep.fixed_dim;
    j["rotating_dim"] = rep.rotating_dim;
    json taus = json::array();
    for (const Matrix& tau : rep.tau_states) taus.push_back(matrix_to_json(tau));
    j["tau_states"] = std::move(taus);
    j["diagnostics"] = json{{"unital", rep.unital},
                            {"unital_residual", rep.unital_residual},
                            {"tp_residual", rep.tp_residual},
                            {"commutant_dim", rep.commutant_dim},
                            {"spectral_gap", rep.spectral_gap},
                            {"warnings", rep.warnings}};
    j["tolerances"] = tolerances_to_json(rep.tol);
    j["seed"] = rep.seed;
    j["tool_version"] = kToolVersion;
    j["input_digest"] = input_digest;
    if (!label.empty()) j["label"] = label;
    j["generated_at"] = timestamp_utc();
    return j;
}

json verification_to_json(const VerificationReport& rep, const std::string& channel_digest,
                          const std::string& code_digest, const Tolerance& tol,
                          std::uint64_t seed, long recovery_kraus_count) {
    json j;
    j["mode"] = to_string(rep.mode);
    j["verdict"] = rep.pass ? "pass" : "fail";
    j["worst_pair_deviation"] = rep.worst_pair_deviation;
    j["pairs_tested"] = rep.pairs_tested;
    j["diagnostics"] = rep.diagnostics;
    if (recovery_kraus_count >= 0) j["recovery_kraus_count"] = recovery_kraus_count;
    j["tolerances"] = tolerances_to_json(tol);
    j["seed"] = seed;
    j["channel_digest"] = channel_digest;
    j["code_digest"] = code_digest;
    j["tool_version"] = kToolVersion;
    j["generated_at"] = timestamp_utc();
    return j;
}

json planted_truth_to_json(const PlantedStructure& truth, Index dim, std::uint64_t seed) {
    json j;
    j["dim"] = dim;
    json shape = json::array();
    for (const auto& [dk, nk] : truth.shape) shape.push_back(json::array({dk, nk}));
    j["shape"] = std::move(shape);
    Index rank = 0;
    for (const auto& [dk, nk] : truth.shape) rank += dk * nk;
    j["support_rank"] = rank;
    j["leak_dim"] = truth.leak_dim;
    j["spectral_gap"] = truth.spectral_gap;
    j["seed"] = seed;
    return j;
}

// ------------------------------ file plumbing --------------------------------

std::string digest_file(const std::string& path) {
    const std::string bytes = read_text_file(path);
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    char buf[32];
    std::snprintf(buf, sizeof(buf), "fnv1a:%016llx", static_cast<unsigned long long>(h));
    return buf;
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw ParseError("cannot open file: " + path);
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw Error("cannot write file: " + path);
    }
    out << content;
    if (!out) {
        throw Error("write failed: " + path);
    }
}

std::string timestamp_utc() {
    const std::time_t now = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

std::string summary_line(const IpsReport& rep) {
    std::ostringstream out;
    out << "shape=[";
    for (size_t i = 0; i < rep.shape.size(); ++i) {
        if (i) out << ",";
        out << "(" << rep.shape[i].first << "," << rep.shape[i].second << ")";
    }
    out << "] support_rank=" << rep.support_rank << " fixed_dim=" << rep.fixed_dim
        << " unital=" << (rep.unital ? "true" : "false");
    return out.str();
}

}  // namespace ips::io
