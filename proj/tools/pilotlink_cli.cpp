// SPDX-License-Identifier: Apache-2.0
//
// pilotlink: simulate, sweep, report and validate SigMF metadata.
#include "pilotlink/harness.hpp"
#include "pilotlink/sigmf.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

namespace fs = std::filesystem;
using namespace pilotlink;

namespace {

struct Common {
    std::string out;
    std::string sigmf_out;
    std::string events_out;
    std::string iq_out;
    std::optional<double> altitude;
    std::optional<double> link_distance;
    std::string environment = "simulated";
    unsigned workers = 1;
};

std::ofstream open_out(const std::string& path, std::ios::openmode mode = std::ios::out)
{
    std::ofstream f(path, mode);
    if (!f) throw std::runtime_error("cannot write '" + path + "'");
    return f;
}

void write_sigmf_files(const std::vector<TrialRun>& runs, const Common& c, double sample_rate)
{
    if (c.sigmf_out.empty()) return;
    fs::create_directories(c.sigmf_out);
    SigmfEnvironment env{c.altitude, c.link_distance, c.environment};
    for (const auto& run : runs) {
        const SigmfRecord rec = make_sigmf_record(run.result, env, sample_rate, run.frame_offsets);
        auto f = open_out((fs::path(c.sigmf_out) / (run_id(run.result) + ".sigmf-meta")).string());
        f << to_json(rec).dump(2) << '\n';
    }
}

void write_outputs(const std::vector<TrialRun>& runs, const Common& c, const TrialOptions& opts)
{
    std::vector<TrialResult> rows;
    for (const auto& r : runs) rows.push_back(r.result);
    if (c.out.empty() || c.out == "-") {
        write_csv(std::cout, rows);
    } else {
        auto f = open_out(c.out);
        write_csv(f, rows);
    }
    if (!c.events_out.empty()) {
        auto f = open_out(c.events_out);
        for (const auto& r : runs) write_event_log(f, r);
    }
    if (!c.iq_out.empty()) {
        auto f = open_out(c.iq_out, std::ios::binary);
        for (const auto& r : runs) write_cf32_le(f, r.iq);
    }
    write_sigmf_files(runs, c, 1.0 / opts.receiver.pulse.sample_period());
}

void print_improvement(std::ostream& os, const std::vector<TrialResult>& rows)
{
    const auto table = improvement_table(rows);
    if (table.empty()) return;
    os << "profile,modulation,baseline_bps,best_lambda_p,best_bps,gain_percent\n";
    for (const auto& r : table)
        os << r.profile << ',' << modulation_name(r.modulation) << ',' << format_double(r.baseline_bps) << ','
           << r.best_lambda << ',' << format_double(r.best_bps) << ',' << format_double(r.gain_percent) << '\n';
}

const CLI::Validator kModulation = CLI::IsMember({"4qam", "8qam", "16qam", "64qam", "qpsk"}, CLI::ignore_case);
const CLI::Validator kFading = CLI::IsMember({"none", "rayleigh", "rician"});

const CLI::Validator kRealOrInf(
    [](std::string& v) -> std::string {
        if (v == "inf") return {};
        try {
            parse_double(v);
            return {};
        } catch (const std::exception&) {
            return "expected a number or 'inf', got '" + v + "'";
        }
    },
    "REAL|inf");

const CLI::Validator kCountOrInf(
    [](std::string& v) -> std::string {
        if (v == "inf") return {};
        if (!v.empty() && v.find_first_not_of("0123456789") == std::string::npos && std::stol(v) >= 1) return {};
        return "expected a positive integer or 'inf', got '" + v + "'";
    },
    "N|inf");

void add_output_flags(CLI::App* cmd, Common& c)
{
    cmd->add_option("--out", c.out, "CSV results file ('-' or omitted: stdout)");
    cmd->add_option("--sigmf-out", c.sigmf_out, "directory for <run-id>.sigmf-meta files");
    cmd->add_option("--events-out", c.events_out, "per-frame event log (input to 'report')");
    cmd->add_option("--altitude", c.altitude, "altitude in metres, recorded in SigMF metadata");
    cmd->add_option("--link-distance", c.link_distance, "link distance in metres, recorded in SigMF metadata");
    cmd->add_option("--environment", c.environment, "environment label for SigMF metadata");
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Burst-mode pilot-aided link simulator"};
    app.require_subcommand(1);

    // sim ------------------------------------------------------------------
    Common sim_c;
    std::string mod = "16qam", snr = "inf", coherence = "inf", fading = "none";
    int pilot_reps = 4;
    double cfo = 0.0, drift = 0.0, walk = 0.0, theta = 0.0, rician_k = 10.0;
    std::uint64_t frames = 100, seed = 1, trials = 1;
    auto* sim = app.add_subcommand("sim", "run a single (lambda_p, modulation) cell");
    sim->add_option("--mod", mod, "4qam, 8qam, 16qam or 64qam")->capture_default_str()->check(kModulation);
    sim->add_option("--pilot-reps", pilot_reps, "pilot repetitions lambda_p (1, 2, 4, 6, 8)")
        ->capture_default_str()
        ->check(CLI::IsMember({1, 2, 4, 6, 8}));
    sim->add_option("--snr-db", snr, "SNR in dB over occupied samples, or 'inf'")->capture_default_str()->check(kRealOrInf);
    sim->add_option("--cfo-hz", cfo, "initial carrier frequency offset")->capture_default_str();
    sim->add_option("--drift-hz-per-s", drift, "linear oscillator drift")->capture_default_str();
    sim->add_option("--drift-walk-hz", walk, "random-walk step per coherence epoch (std dev, Hz)")->capture_default_str();
    sim->add_option("--theta", theta, "initial phase in radians")->capture_default_str();
    sim->add_option("--coherence-symbols", coherence, "coherence epoch length in symbols, or 'inf'")
        ->capture_default_str()
        ->check(kCountOrInf);
    sim->add_option("--fading", fading, "none, rayleigh or rician")->capture_default_str()->check(kFading);
    sim->add_option("--rician-k", rician_k, "linear K factor for rician fading")->capture_default_str();
    sim->add_option("--frames", frames, "frames per trial")->capture_default_str()->check(CLI::PositiveNumber);
    sim->add_option("--trials", trials, "independent trials")->capture_default_str()->check(CLI::PositiveNumber);
    sim->add_option("--seed", seed, "master seed")->capture_default_str();
    sim->add_option("--iq-out", sim_c.iq_out, "received samples as cf32_le");
    sim->add_option("--workers", sim_c.workers, "worker threads")->capture_default_str();
    add_output_flags(sim, sim_c);

    // sweep ----------------------------------------------------------------
    Common sw_c;
    std::string config;
    std::optional<std::uint64_t> sw_seed, sw_frames, sw_trials;
    sw_c.workers = std::max(1u, std::thread::hardware_concurrency());
    auto* sweep = app.add_subcommand("sweep", "run a (lambda_p x modulation x profile) grid from a config file");
    sweep->add_option("--config", config, "key = value sweep description")->required()->check(CLI::ExistingFile);
    sweep->add_option("--seed", sw_seed, "override the config's master seed");
    sweep->add_option("--frames", sw_frames, "override frames per trial")->check(CLI::PositiveNumber);
    sweep->add_option("--trials", sw_trials, "override trials per cell")->check(CLI::PositiveNumber);
    sweep->add_option("--workers", sw_c.workers, "worker threads (output does not depend on this)");
    std::string improvement_out;
    sweep->add_option("--improvement-out", improvement_out, "goodput gain table (lambda_p=1 to best)");
    add_output_flags(sweep, sw_c);

    // report ---------------------------------------------------------------
    std::string log_path, report_out, report_improvement;
    auto* report = app.add_subcommand("report", "recompute trial metrics from an event log");
    report->add_option("log", log_path, "event log written by --events-out")->required()->check(CLI::ExistingFile);
    report->add_option("--out", report_out, "CSV results file (default stdout)");
    report->add_option("--improvement-out", report_improvement, "goodput gain table");

    // validate-sigmf -------------------------------------------------------
    std::vector<std::string> sigmf_files;
    auto* validate = app.add_subcommand("validate-sigmf", "check SigMF metadata documents");
    validate->add_option("files", sigmf_files, "metadata files")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "error: " << e.what() << "\n\n" << app.help();
        return 2;
    }

    try {
        if (*sim) {
            SweepSpec spec;
            spec.lambdas = {pilot_reps};
            spec.modulations = {parse_modulation(mod)};
            ChannelProfile p;
            p.name = "sim";
            p.snr_db = parse_optional_double(snr);
            p.delta_f_hz = cfo;
            p.drift_hz_per_s = drift;
            p.drift_walk_sigma_hz = walk;
            p.theta_in = theta;
            p.fading = parse_fading(fading);
            p.rician_k = rician_k;
            if (coherence != "inf") {
                if (!apply_key(p, "coherence_symbols", coherence)) throw std::invalid_argument("coherence-symbols");
            }
            spec.profiles = {p};
            spec.frames_per_trial = frames;
            spec.trials_per_cell = trials;
            spec.master_seed = seed;
            TrialOptions opts;
            opts.capture_iq = !sim_c.iq_out.empty() || !sim_c.sigmf_out.empty();
            const auto runs = run_sweep_detailed(spec, sim_c.workers, opts);
            write_outputs(runs, sim_c, opts);
            for (const auto& r : runs) {
                const auto& t = r.result;
                std::cerr << run_id(t) << ": crc_pass " << t.crc_pass << "/" << t.frames_sent << ", goodput "
                          << format_double(t.goodput_bps) << " bps, throughput " << format_double(t.throughput_bps)
                          << " bps, evm " << format_double(t.evm_percent) << " %, sinr " << format_double(t.sinr_db)
                          << " dB\n";
            }
            return 0;
        }
        if (*sweep) {
            SweepSpec spec = load_sweep_spec(config);
            if (sw_seed) spec.master_seed = *sw_seed;
            if (sw_frames) spec.frames_per_trial = *sw_frames;
            if (sw_trials) spec.trials_per_cell = *sw_trials;
            TrialOptions opts;
            opts.capture_iq = !sw_c.sigmf_out.empty();
            const auto runs = run_sweep_detailed(spec, sw_c.workers, opts);
            write_outputs(runs, sw_c, opts);
            if (!improvement_out.empty()) {
                std::vector<TrialResult> rows;
                for (const auto& r : runs) rows.push_back(r.result);
                auto f = open_out(improvement_out);
                print_improvement(f, rows);
            }
            return 0;
        }
        if (*report) {
            std::ifstream in(log_path);
            std::vector<TrialResult> rows;
            for (const auto& log : read_event_log(in)) rows.push_back(report_from_log(log));
            if (report_out.empty() || report_out == "-") {
                write_csv(std::cout, rows);
            } else {
                auto f = open_out(report_out);
                write_csv(f, rows);
            }
            if (!report_improvement.empty()) {
                auto f = open_out(report_improvement);
                print_improvement(f, rows);
            }
            return 0;
        }
        if (*validate) {
            int bad = 0;
            for (const auto& path : sigmf_files) {
                std::ifstream in(path);
                std::vector<std::string> problems;
                if (!in) {
                    problems.push_back("cannot open file");
                } else {
                    try {
                        problems = validate_sigmf(nlohmann::ordered_json::parse(in));
                    } catch (const nlohmann::json::parse_error& e) {
                        problems.push_back(std::string("invalid JSON: ") + e.what());
                    }
                }
                if (problems.empty()) {
                    std::cout << path << ": ok\n";
                } else {
                    ++bad;
                    for (const auto& p : problems) std::cerr << path << ": " << p << '\n';
                }
            }
            return bad ? 1 : 0;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
