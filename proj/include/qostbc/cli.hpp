// SPDX-License-Identifier: Apache-2.0
//
// qostbc: turbo-coded quasi-orthogonal STBC link-level simulator
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <map>
#include <memory>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include <CLI11.hpp>

#include "sim.hpp"

namespace qostbc
{

// Invalid command line. The front end exits with status 2.
class UsageError : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

// Environment variable consulted for the default master seed.
inline constexpr const char *kSeedEnv = "QOSTBC_SEED";

struct CliArgs
{
    SimConfig sim;
    std::string output_path; // empty: CSV to stdout
    bool plot = false;
    bool demo = false;
    double demo_snr_db = 2.0;
    std::size_t demo_show_bits = 64;
};

inline std::uint64_t default_seed()
{
    if (const char *env = std::getenv(kSeedEnv))
    {
        std::uint64_t v = 0;
        const std::string_view s{env};
        const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
        if (ec != std::errc{} || p != s.data() + s.size())
            throw UsageError(std::string(kSeedEnv) + " is not an unsigned integer: " + env);
        return v;
    }
    return 1;
}

namespace detail
{
inline std::unique_ptr<CLI::App> make_app(CliArgs &a, std::string &modulation, std::string &coding, std::string &channel,
                         std::vector<double> &snr, bool &noiseless)
{
    auto app = std::make_unique<CLI::App>("Turbo-coded 4x1 quasi-orthogonal STBC BER simulator", "qostbc_sim");
    app->add_option("--modulation", modulation, "qpsk | qam4 | psk16 | qam16")
        ->check(CLI::IsMember({"qpsk", "qam4", "psk16", "qam16"}));
    app->add_option("--coding", coding, "turbo | uncoded")->check(CLI::IsMember({"turbo", "uncoded"}));
    app->add_option("--iterations", a.sim.turbo.iterations, "turbo decoder iterations (>= 1)");
    app->add_option("--snr", snr, "SNR grid in dB: MIN MAX STEP")->expected(3);
    app->add_flag("--noiseless", noiseless, "disable noise (single point at infinite SNR)");
    app->add_option("--bits", a.sim.info_bits, "information bits per frame");
    app->add_option("--min-frames", a.sim.min_frames, "frames simulated at least per SNR point");
    app->add_option("--min-errors", a.sim.min_bit_errors, "bit errors collected before a point may stop");
    app->add_option("--max-frames", a.sim.max_frames, "frame cap per SNR point");
    app->add_option("--seed", a.sim.master_seed, std::string("master seed (default from ") + kSeedEnv + " or 1)");
    app->add_option("--interleaver-seed", a.sim.turbo.interleaver_seed, "turbo interleaver seed");
    app->add_option("--channel", channel, "rayleigh | awgn | rayleigh1x1")
        ->check(CLI::IsMember({"rayleigh", "awgn", "rayleigh1x1"}));
    app->add_option("--threads", a.sim.threads, "worker threads (0 = all cores)");
    app->add_option("-o,--output", a.output_path, "CSV output path (default stdout)");
    app->add_flag("--plot", a.plot, "print an ASCII BER plot");

    auto *demo = app->add_subcommand("demo", "simulate one frame and show transmitted vs retrieved bits");
    demo->add_option("--snr-db", a.demo_snr_db, "SNR of the demonstration frame");
    demo->add_option("--show", a.demo_show_bits, "number of leading bits to print");
    app->require_subcommand(0, 1);
    return app;
}
} // namespace detail

// Parses argv (without the program name). Throws UsageError on invalid
// input; `--help` throws CLI::CallForHelp, which the caller prints.
inline CliArgs parse_args(const std::vector<std::string> &argv)
{
    CliArgs a;
    a.sim.master_seed = default_seed();
    std::string modulation{to_string(a.sim.modulation)};
    std::string coding{to_string(a.sim.coding)};
    std::string channel{to_string(a.sim.channel_mode)};
    std::vector<double> snr;
    bool noiseless = false;

    auto app = detail::make_app(a, modulation, coding, channel, snr, noiseless);
    std::vector<std::string> reversed(argv.rbegin(), argv.rend());
    try
    {
        app->parse(reversed);
    }
    catch (const CLI::CallForHelp &)
    {
        throw;
    }
    catch (const CLI::ParseError &e)
    {
        throw UsageError(e.what());
    }

    a.demo = app->got_subcommand("demo");
    a.sim.modulation = *parse_scheme(modulation);
    a.sim.coding = *parse_coding(coding);
    a.sim.channel_mode = *parse_channel_mode(channel);
    try
    {
        if (noiseless)
            a.sim.snr_points_db = {std::numeric_limits<double>::infinity()};
        else if (!snr.empty())
            a.sim.snr_points_db = snr_grid(snr[0], snr[1], snr[2]);
        a.sim.turbo.validate();
        a.sim.validate();
    }
    catch (const std::invalid_argument &e)
    {
        throw UsageError(e.what());
    }
    return a;
}

inline std::string help_text()
{
    CliArgs a;
    std::string m, c, ch;
    std::vector<double> s;
    bool n = false;
    return detail::make_app(a, m, c, ch, s, n)->help();
}

// Shortest round-trip decimal form; "inf" for infinity.
inline std::string format_double(double v)
{
    if (std::isinf(v))
        return v > 0 ? "inf" : "-inf";
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

// Command line that reproduces `a` (sweep options only).
inline std::vector<std::string> to_args(const CliArgs &a)
{
    const auto &s = a.sim;
    std::vector<std::string> out = {
        "--modulation", std::string(to_string(s.modulation)),
        "--coding", std::string(to_string(s.coding)),
        "--iterations", std::to_string(s.turbo.iterations),
        "--bits", std::to_string(s.info_bits),
        "--min-frames", std::to_string(s.min_frames),
        "--min-errors", std::to_string(s.min_bit_errors),
        "--max-frames", std::to_string(s.max_frames),
        "--seed", std::to_string(s.master_seed),
        "--interleaver-seed", std::to_string(s.turbo.interleaver_seed),
        "--channel", std::string(to_string(s.channel_mode)),
        "--threads", std::to_string(s.threads),
    };
    if (s.snr_points_db.size() == 1 && std::isinf(s.snr_points_db[0]))
        out.push_back("--noiseless");
    else
    {
        const double lo = s.snr_points_db.front();
        const double hi = s.snr_points_db.back();
        const double step = s.snr_points_db.size() > 1 ? s.snr_points_db[1] - lo : 1.0;
        out.insert(out.end(), {"--snr", format_double(lo), format_double(hi), format_double(step)});
    }
    if (!a.output_path.empty())
        out.insert(out.end(), {"--output", a.output_path});
    if (a.plot)
        out.push_back("--plot");
    return out;
}

// ---------------------------------------------------------------------------
// CSV
// ---------------------------------------------------------------------------

inline constexpr std::string_view kCsvHeader = "snr_db,modulation,coding,iterations,frames,bits,bit_errors,ber";

// Six significant digits in scientific notation with a bare exponent:
// 6.90000e-3, 1.00000e0, 0.00000e0.
inline std::string format_ber(double ber)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.5e", ber);
    const std::string s{buf};
    const auto e = s.find('e');
    const int exponent = std::stoi(s.substr(e + 1));
    return s.substr(0, e) + "e" + std::to_string(exponent);
}

struct CsvRow
{
    double snr_db = 0.0;
    std::string modulation;
    std::string coding;
    int iterations = 0;
    std::size_t frames = 0;
    std::size_t bits = 0;
    std::size_t bit_errors = 0;
    double ber = 0.0;

    bool operator==(const CsvRow &) const = default;
};

inline std::vector<CsvRow> to_rows(const BerCurve &curve)
{
    std::vector<CsvRow> rows;
    for (const auto &r : curve.records)
        rows.push_back({r.snr_db, std::string(to_string(curve.config.modulation)),
                        std::string(to_string(curve.config.coding)), curve.config.effective_iterations(), r.frames,
                        r.bits_total, r.bit_errors, r.ber()});
    return rows;
}

inline void write_csv(std::ostream &os, std::span<const CsvRow> rows)
{
    os << kCsvHeader << '\n';
    for (const auto &r : rows)
        os << format_double(r.snr_db) << ',' << r.modulation << ',' << r.coding << ',' << r.iterations << ','
           << r.frames << ',' << r.bits << ',' << r.bit_errors << ',' << format_ber(r.ber) << '\n';
}

inline std::string csv_string(const BerCurve &curve)
{
    std::ostringstream os;
    const auto rows = to_rows(curve);
    write_csv(os, rows);
    return os.str();
}

inline void write_csv(const BerCurve &curve, const std::string &path)
{
    std::ofstream f(path, std::ios::binary);
    if (!f)
        throw std::runtime_error("cannot open " + path + " for writing");
    f << csv_string(curve);
    if (!f.flush())
        throw std::runtime_error("write failed: " + path);
}

namespace detail
{
template <typename T>
T parse_number(std::string_view s, const std::string &what)
{
    if constexpr (std::is_floating_point_v<T>)
    {
        if (s == "inf")
            return std::numeric_limits<T>::infinity();
        if (s == "-inf")
            return -std::numeric_limits<T>::infinity();
    }
    T v{};
    const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || p != s.data() + s.size())
        throw std::runtime_error("bad " + what + " field: '" + std::string(s) + "'");
    return v;
}
} // namespace detail

inline std::vector<CsvRow> read_csv(std::istream &is)
{
    std::string line;
    if (!std::getline(is, line) || line != kCsvHeader)
        throw std::runtime_error("missing or unexpected CSV header");
    std::vector<CsvRow> rows;
    while (std::getline(is, line))
    {
        if (line.empty())
            continue;
        std::vector<std::string_view> f;
        std::string_view rest{line};
        for (auto pos = rest.find(','); pos != std::string_view::npos; pos = rest.find(','))
        {
            f.push_back(rest.substr(0, pos));
            rest.remove_prefix(pos + 1);
        }
        f.push_back(rest);
        if (f.size() != 8)
            throw std::runtime_error("CSV row has " + std::to_string(f.size()) + " fields, expected 8");
        rows.push_back({detail::parse_number<double>(f[0], "snr_db"), std::string(f[1]), std::string(f[2]),
                        detail::parse_number<int>(f[3], "iterations"),
                        detail::parse_number<std::size_t>(f[4], "frames"),
                        detail::parse_number<std::size_t>(f[5], "bits"),
                        detail::parse_number<std::size_t>(f[6], "bit_errors"),
                        std::stod(std::string(f[7]))});
    }
    return rows;
}

// ---------------------------------------------------------------------------
// ASCII plot
// ---------------------------------------------------------------------------

inline constexpr int kPlotWidth = 60;
inline constexpr int kPlotHeight = 20;
inline constexpr char kPlotMarker = '*';
inline constexpr char kPlotFloorMarker = 'v';

// log10(BER) against SNR on a fixed 60x20 grid. BER = 0 points are drawn as
// 'v' on the bottom row; all others as '*' on rows above it.
inline std::string ascii_plot(const BerCurve &curve)
{
    const auto &recs = curve.records;
    if (recs.empty())
        throw std::invalid_argument("nothing to plot");

    std::vector<double> xs;
    for (const auto &r : recs)
        if (std::isfinite(r.snr_db))
            xs.push_back(r.snr_db);
    const double x_lo = xs.empty() ? 0.0 : *std::min_element(xs.begin(), xs.end());
    const double x_hi = xs.empty() ? 0.0 : *std::max_element(xs.begin(), xs.end());

    double y_lo = -1.0;
    for (const auto &r : recs)
        if (r.ber() > 0.0)
            y_lo = std::min(y_lo, std::floor(std::log10(r.ber())));
    const double y_hi = 0.0;

    std::vector<std::string> grid(kPlotHeight, std::string(kPlotWidth, ' '));
    for (const auto &r : recs)
    {
        int col = kPlotWidth - 1;
        if (std::isfinite(r.snr_db))
            col = x_hi > x_lo ? static_cast<int>(std::lround((r.snr_db - x_lo) / (x_hi - x_lo) * (kPlotWidth - 1)))
                              : kPlotWidth / 2;
        if (r.ber() > 0.0)
        {
            const double frac = (y_hi - std::log10(r.ber())) / (y_hi - y_lo);
            const int row = static_cast<int>(std::lround(frac * (kPlotHeight - 2)));
            grid[std::clamp(row, 0, kPlotHeight - 2)][col] = kPlotMarker;
        }
        else
            grid[kPlotHeight - 1][col] = kPlotFloorMarker;
    }

    std::ostringstream os;
    os << "log10(BER)\n";
    for (int row = 0; row < kPlotHeight; ++row)
    {
        char label[16] = "       ";
        if (row == 0)
            std::snprintf(label, sizeof label, "%6.1f ", y_hi);
        else if (row == kPlotHeight - 2)
            std::snprintf(label, sizeof label, "%6.1f ", y_lo);
        else if (row == kPlotHeight - 1)
            std::snprintf(label, sizeof label, "  zero ");
        os << label << '|' << grid[row] << '\n';
    }
    os << "       +" << std::string(kPlotWidth, '-') << '\n';
    char axis[128];
    std::snprintf(axis, sizeof axis, "       %-10s%*s", format_double(x_lo).c_str(), kPlotWidth - 9,
                  format_double(x_hi).c_str());
    os << axis << "  SNR (dB)\n";
    return os.str();
}

} // namespace qostbc
