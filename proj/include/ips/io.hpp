// io.hpp — JSON serialization of channels, codes, and analysis reports, plus
// file helpers for the command-line tool.

#pragma once

#include "ips/channel.hpp"
#include "ips/codes.hpp"
#include "ips/matcore.hpp"

#include "json.hpp"

#include <string>

namespace ips::io {

inline constexpr const char* kToolVersion = "0.1.0";

// Malformed or schema-violating input files.
class ParseError : public Error {
public:
    using Error::Error;
};

// Matrices are encoded as row-major nested arrays of [re, im] pairs.
nlohmann::json matrix_to_json(const Matrix& m);
Matrix matrix_from_json(const nlohmann::json& j);

struct ChannelFile {
    Channel channel;
    std::string label;
};

// {"dim": d, "label": "...", "kraus": [matrix, ...]}
ChannelFile channel_from_json(const nlohmann::json& j, const Tolerance& tol = {});
nlohmann::json channel_to_json(const Channel& e, const std::string& label = "");
ChannelFile read_channel_file(const std::string& path, const Tolerance& tol = {});

// {"dim": d, "basis": [matrix, ...], "samples": [matrix, ...]}
Code code_from_json(const nlohmann::json& j, const Tolerance& tol = {});
Code read_code_file(const std::string& path, const Tolerance& tol = {});

// Analysis report; identical bytes across runs except the generated_at field.
nlohmann::json report_to_json(const IpsReport& rep, const std::string& input_digest,
                              const std::string& label = "");

nlohmann::json verification_to_json(const VerificationReport& rep,
                                    const std::string& channel_digest,
                                    const std::string& code_digest, const Tolerance& tol,
                                    std::uint64_t seed, long recovery_kraus_count = -1);

// Ground-truth sidecar written next to generated channels.
nlohmann::json planted_truth_to_json(const PlantedStructure& truth, Index dim,
                                     std::uint64_t seed);

// 64-bit FNV-1a over the raw file bytes, formatted "fnv1a:%016x".
std::string digest_file(const std::string& path);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

std::string timestamp_utc();

// One-line human summary for stdout: "shape=[(2,2)] support_rank=4 unital=false".
std::string summary_line(const IpsReport& rep);

}  // namespace ips::io
