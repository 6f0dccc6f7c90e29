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

#include <exception>
#include <iostream>
#include <string>
#include <vector>

#include <qostbc/cli.hpp>

namespace
{

int run_demo(const qostbc::CliArgs &args)
{
    const qostbc::LinkSimulator link{args.sim};
    const auto frame = link.run_frame(args.demo_snr_db, 0);
    const std::size_t show = std::min(args.demo_show_bits, frame.tx.size());
    std::cout << "modulation " << qostbc::to_string(args.sim.modulation) << ", coding "
              << qostbc::to_string(args.sim.coding) << ", SNR " << qostbc::format_double(args.demo_snr_db)
              << " dB, " << frame.tx.size() << " bits\n";
    std::cout << "transmitted: ";
    for (std::size_t i = 0; i < show; ++i)
        std::cout << int(frame.tx[i]);
    std::cout << "\nretrieved:   ";
    for (std::size_t i = 0; i < show; ++i)
        std::cout << int(frame.rx[i]);
    std::cout << "\nerrors:      ";
    for (std::size_t i = 0; i < show; ++i)
        std::cout << (frame.tx[i] != frame.rx[i] ? '^' : ' ');
    const auto errors = frame.bit_errors();
    std::cout << "\nbit errors " << errors << " / " << frame.tx.size() << ", BER "
              << qostbc::format_ber(static_cast<double>(errors) / static_cast<double>(frame.tx.size())) << '\n';
    return 0;
}

int run_sweep(const qostbc::CliArgs &args)
{
    const auto curve = qostbc::sweep(args.sim);
    if (args.output_path.empty())
        std::cout << qostbc::csv_string(curve);
    else
        qostbc::write_csv(curve, args.output_path);
    if (args.plot)
        (args.output_path.empty() ? std::cerr : std::cout) << qostbc::ascii_plot(curve);
    return 0;
}

} // namespace

int main(int argc, char **argv)
{
    const std::vector<std::string> args(argv + 1, argv + argc);
    qostbc::CliArgs parsed;
    try
    {
        parsed = qostbc::parse_args(args);
    }
    catch (const CLI::CallForHelp &)
    {
        std::cout << qostbc::help_text();
        return 0;
    }
    catch (const qostbc::UsageError &e)
    {
        std::cerr << "usage error: " << e.what() << "\nRun with --help for options.\n";
        return 2;
    }

    try
    {
        return parsed.demo ? run_demo(parsed) : run_sweep(parsed);
    }
    catch (const std::exception &e)
    {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
