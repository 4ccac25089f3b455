// main.cpp — `ips` command-line tool: analyze channel files, verify codes
// against the preservation hierarchy, and generate planted test channels.

#include "ips/codes.hpp"
#include "ips/io.hpp"

#include "CLI11.hpp"

#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

constexpr int kExitPass = 0;
constexpr int kExitFail = 1;
constexpr int kExitParse = 2;
constexpr int kExitValidation = 3;
constexpr int kExitStructural = 4;
constexpr int kExitNumeric = 5;

struct ToleranceFlags {
    double eig = 1e-9;
    double rank = 1e-10;
    double verify = 1e-8;

    ips::Tolerance build() const {
        ips::Tolerance tol{eig, rank, verify};
        tol.validate();
        return tol;
    }
};

void add_tolerance_flags(CLI::App* cmd, ToleranceFlags& flags) {
    cmd->add_option("--tol-eig", flags.eig, "Eigenvalue clustering radius")
        ->capture_default_str();
    cmd->add_option("--tol-rank", flags.rank, "Rank decision cutoff")->capture_default_str();
    cmd->add_option("--tol-verify", flags.verify, "Verification threshold")
        ->capture_default_str();
}

std::string default_report_path(const std::string& input, const char* suffix) {
    fs::path p(input);
    fs::path base = p.parent_path() / p.stem();
    return base.string() + suffix;
}

ips::AnalysisMode parse_analysis_mode(const std::string& mode) {
    if (mode == "noiseless") return ips::AnalysisMode::noiseless;
    if (mode == "unitarily-noiseless") return ips::AnalysisMode::unitarily_noiseless;
    throw ips::ParameterError("unknown analysis mode: " + mode);
}

int analyze_one(const std::string& input, const std::string& out,
                ips::AnalysisMode mode, const ips::Tolerance& tol, std::uint64_t seed) {
    ips::io::ChannelFile file = ips::io::read_channel_file(input, tol);
    ips::IpsReport rep = ips::analyze(file.channel, mode, tol, seed);
    json j = ips::io::report_to_json(rep, ips::io::digest_file(input), file.label);
    ips::io::write_text_file(out, j.dump(2) + "\n");
    std::cout << ips::io::summary_line(rep) << "\n";
    return kExitPass;
}

int run_analyze(const std::string& input, std::string out, const std::string& mode_name,
                const ToleranceFlags& flags, std::uint64_t seed) {
    const ips::Tolerance tol = flags.build();
    const ips::AnalysisMode mode = parse_analysis_mode(mode_name);

    if (fs::is_directory(input)) {
        // Batch mode: every channel file in the directory, with per-file
        // isolation so one bad input does not abort the rest.
        const fs::path out_dir = out.empty() ? fs::path(input) : fs::path(out);
        fs::create_directories(out_dir);
        int worst = kExitPass;
        std::vector<fs::path> inputs;
        for (const auto& entry : fs::directory_iterator(input)) {
            if (!entry.is_regular_file()) continue;
            const std::string name = entry.path().filename().string();
            if (!name.ends_with(".json")) continue;
            if (name.ends_with(".truth.json") || name.ends_with(".report.json") ||
                name.ends_with(".verify.json")) {
                continue;
            }
            inputs.push_back(entry.path());
        }
        std::sort(inputs.begin(), inputs.end());
        for (const fs::path& p : inputs) {
            const std::string report =
                (out_dir / (p.stem().string() + ".report.json")).string();
            std::cout << p.filename().string() << ": ";
            try {
                analyze_one(p.string(), report, mode, tol, seed);
            } catch (const std::exception& ex) {
                std::cerr << "error: " << ex.what() << "\n";
                std::cout << "failed\n";
                if (worst == kExitPass) worst = kExitNumeric;
            }
        }
        return worst;
    }

    if (out.empty()) out = default_report_path(input, ".report.json");
    return analyze_one(input, out, mode, tol, seed);
}

int run_verify(const std::string& channel_path, const std::string& code_path, std::string out,
               const std::string& mode, const ToleranceFlags& flags, std::uint64_t seed,
               int trials) {
    const ips::Tolerance tol = flags.build();
    ips::io::ChannelFile file = ips::io::read_channel_file(channel_path, tol);
    ips::Code code = ips::io::read_code_file(code_path, tol);

    ips::VerificationReport rep;
    long recovery_kraus = -1;
    if (mode == "preserved") {
        rep = ips::is_preserved(file.channel, code, tol, trials, seed);
    } else if (mode == "noiseless") {
        ips::FixedSpaces fspaces = ips::fixed_spaces(file.channel, tol);
        rep = ips::is_noiseless(file.channel, code, fspaces, tol, trials, seed);
    } else if (mode == "unitarily-noiseless") {
        ips::RotatingSpace rot = ips::rotating_space(file.channel, tol);
        rep = ips::is_unitarily_noiseless(file.channel, code, rot, tol, trials, seed);
    } else if (mode == "correctable") {
        ips::CorrectabilityResult res = ips::is_correctable(file.channel, code, tol, trials, seed);
        rep = std::move(res.report);
        recovery_kraus = static_cast<long>(res.recovery.kraus().size());
    } else {
        throw ips::ParameterError("unknown verify mode: " + mode);
    }

    json j = ips::io::verification_to_json(rep, ips::io::digest_file(channel_path),
                                           ips::io::digest_file(code_path), tol, seed,
                                           recovery_kraus);
    if (out.empty()) out = default_report_path(channel_path, ".verify.json");
    ips::io::write_text_file(out, j.dump(2) + "\n");
    std::cout << "mode=" << ips::to_string(rep.mode) << " verdict="
              << (rep.pass ? "pass" : "fail")
              << " worst_pair_deviation=" << rep.worst_pair_deviation << "\n";
    return rep.pass ? kExitPass : kExitFail;
}

std::vector<std::pair<ips::Index, ips::Index>> parse_shape_spec(const std::string& spec) {
    std::vector<std::pair<ips::Index, ips::Index>> shape;
    std::string token;
    std::istringstream stream(spec);
    while (std::getline(stream, token, ',')) {
        const auto colon = token.find(':');
        if (colon == std::string::npos) {
            throw ips::io::ParseError("shape spec entries must look like 'd:n', got '" + token +
                                      "'");
        }
        try {
            const long d = std::stol(token.substr(0, colon));
            const long n = std::stol(token.substr(colon + 1));
            shape.emplace_back(d, n);
        } catch (const std::exception&) {
            throw ips::io::ParseError("cannot parse shape entry '" + token + "'");
        }
    }
    if (shape.empty()) {
        throw ips::io::ParseError("empty shape spec");
    }
    return shape;
}

int run_generate(const std::string& spec, ips::Index leak, std::uint64_t seed,
                 const std::string& out, const ToleranceFlags& flags) {
    const ips::Tolerance tol = flags.build();
    const auto shape = parse_shape_spec(spec);
    ips::PlantedChannel planted = ips::make_planted(shape, leak, seed, tol);

    std::string label = "planted shape=" + spec + " leak=" + std::to_string(leak) +
                        " seed=" + std::to_string(seed);
    json j = ips::io::channel_to_json(planted.channel, label);
    ips::io::write_text_file(out, j.dump(2) + "\n");

    std::string truth_path = out;
    if (truth_path.ends_with(".json")) {
        truth_path.resize(truth_path.size() - 5);
    }
    truth_path += ".truth.json";
    json truth = ips::io::planted_truth_to_json(planted.truth, planted.channel.dim(), seed);
    ips::io::write_text_file(truth_path, truth.dump(2) + "\n");

    std::cout << "wrote " << out << " (dim " << planted.channel.dim() << ", "
              << planted.channel.kraus().size() << " Kraus operators) and " << truth_path << "\n";
    return kExitPass;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"information-preserving structures of quantum channels"};
    app.require_subcommand(1);

    // analyze
    std::string an_input, an_out, an_mode = "noiseless";
    ToleranceFlags an_tol;
    std::uint64_t an_seed = 1;
    CLI::App* an = app.add_subcommand("analyze", "Find the IPS of a channel file");
    an->add_option("input", an_input, "Channel JSON file (or a directory of them)")->required();
    an->add_option("--mode", an_mode, "noiseless | unitarily-noiseless")->capture_default_str();
    an->add_option("--seed", an_seed, "Seed for randomized probes")->capture_default_str();
    an->add_option("--out", an_out, "Report path (default: <input>.report.json)");
    add_tolerance_flags(an, an_tol);

    // verify
    std::string ve_channel, ve_code, ve_out, ve_mode;
    ToleranceFlags ve_tol;
    std::uint64_t ve_seed = 2026;
    int ve_trials = 6;
    CLI::App* ve = app.add_subcommand("verify", "Check a code against a channel");
    ve->add_option("channel", ve_channel, "Channel JSON file")->required();
    ve->add_option("code", ve_code, "Code JSON file")->required();
    ve->add_option("--mode", ve_mode,
                   "preserved | noiseless | unitarily-noiseless | correctable")
        ->required();
    ve->add_option("--seed", ve_seed, "Seed for pair sampling")->capture_default_str();
    ve->add_option("--trials", ve_trials, "Random code states per probe")->capture_default_str();
    ve->add_option("--out", ve_out, "Report path (default: <channel>.verify.json)");
    add_tolerance_flags(ve, ve_tol);

    // generate
    std::string ge_spec, ge_out;
    ips::Index ge_leak = 0;
    std::uint64_t ge_seed = 7;
    ToleranceFlags ge_tol;
    CLI::App* ge = app.add_subcommand("generate", "Write a planted channel with known structure");
    ge->add_option("shape", ge_spec, "Comma-separated d:n pairs, e.g. '2:2,1:1'")->required();
    ge->add_option("--leak", ge_leak, "Extra leaking dimensions")->capture_default_str();
    ge->add_option("--seed", ge_seed, "Construction seed")->capture_default_str();
    ge->add_option("--out", ge_out, "Output channel path")->required();
    add_tolerance_flags(ge, ge_tol);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitParse;
    }

    try {
        if (an->parsed()) return run_analyze(an_input, an_out, an_mode, an_tol, an_seed);
        if (ve->parsed()) {
            return run_verify(ve_channel, ve_code, ve_out, ve_mode, ve_tol, ve_seed, ve_trials);
        }
        if (ge->parsed()) return run_generate(ge_spec, ge_leak, ge_seed, ge_out, ge_tol);
    } catch (const ips::io::ParseError& ex) {
        std::cerr << "parse error: " << ex.what() << "\n";
        return kExitParse;
    } catch (const ips::StructuralError& ex) {
        std::cerr << "structural error: " << ex.what() << "\n";
        return kExitStructural;
    } catch (const ips::NumericError& ex) {
        std::cerr << "numeric error: " << ex.what() << "\n";
        return kExitNumeric;
    } catch (const ips::ContractError& ex) {
        std::cerr << "validation error: " << ex.what() << "\n";
        return kExitValidation;
    } catch (const ips::DimensionError& ex) {
        std::cerr << "validation error: " << ex.what() << "\n";
        return kExitValidation;
    } catch (const ips::ParameterError& ex) {
        std::cerr << "validation error: " << ex.what() << "\n";
        return kExitValidation;
    } catch (const std::exception& ex) {
        std::cerr << "error: " << ex.what() << "\n";
        return kExitNumeric;
    }
    return kExitPass;
}
