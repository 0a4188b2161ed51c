// wprobe: an instrumentable WebAssembly interpreter
// Copyright 2026 The wprobe Authors.
// SPDX-License-Identifier: Apache-2.0

#include <wprobe/binary.hpp>
#include <wprobe/debug_server.hpp>
#include <wprobe/debugger.hpp>
#include <wprobe/errors.hpp>
#include <wprobe/runner.hpp>
#include <CLI11.hpp>
#include <cstdio>
#include <fstream>
#include <iostream>

namespace
{
struct Cli
{
    std::string module_path;
    std::vector<std::string> args;
    std::vector<std::string> monitors;
    std::string report_path;
    unsigned bench = 0;
    bool empty_probes = false;
    int debug_port = -1;
    bool list = false;
    std::string entry;
};

int fail(int code, const std::string& message)
{
    std::cerr << "wprobe: " << message << '\n';
    return code;
}

void print_reports(const std::vector<wprobe::Report>& reports)
{
    for (const auto& r : reports)
        std::cerr << "== " << r.monitor << " ==\n" << r.text;
}

int finish_run(const Cli& cli, const wprobe::RunResult& r)
{
    print_reports(r.reports);
    if (!cli.report_path.empty() && (r.exit_code == wprobe::exit_ok || r.exit_code == wprobe::exit_trap))
    {
        std::ofstream out{cli.report_path};
        for (const auto& rep : r.reports)
            out << wprobe::to_tsv(rep);
        if (!out)
            return fail(wprobe::exit_usage, "cannot write report file " + cli.report_path);
    }
    switch (r.exit_code)
    {
    case wprobe::exit_ok:
        if (r.result && !r.result->values.empty())
        {
            std::string line = "wprobe: result:";
            for (const auto& v : r.result->values)
                line += ' ' + wprobe::to_string(v);
            std::cerr << line << '\n';
        }
        return 0;
    case wprobe::exit_trap:
        if (r.result && r.result->trap)
            return fail(r.exit_code, "trap: " + std::string(to_string(r.result->trap->kind)) + " at " +
                                         to_string(r.result->trap->location));
        return fail(r.exit_code, r.error);
    case wprobe::exit_monitor_error:
        return fail(r.exit_code, "monitor error: " + r.error);
    default:
        return fail(r.exit_code, "error: " + r.error);
    }
}
}  // namespace

int main(int argc, char** argv)
{
    Cli cli;
    CLI::App app{"wprobe: run a WebAssembly module under instrumentation"};
    app.add_option("module", cli.module_path, "WebAssembly binary");
    app.add_option("args", cli.args, "Arguments for the entry function");
    app.add_option("--monitors", cli.monitors, "Comma-separated monitors, name or name:variant")
        ->allow_extra_args(false)
        ->delimiter(',')
        ->multi_option_policy(CLI::MultiOptionPolicy::TakeAll);
    app.add_option("--report", cli.report_path, "Write machine-readable report rows to PATH");
    app.add_option("--bench", cli.bench, "Benchmark with N repetitions per configuration")->check(CLI::PositiveNumber);
    app.add_flag("--empty-probes", cli.empty_probes, "Install probes but skip their bodies");
    app.add_option("--debug-port", cli.debug_port, "Serve the debugger on ws://127.0.0.1:P/debug")
        ->check(CLI::Range(0, 65535));
    app.add_flag("--list-monitors", cli.list, "List available monitors");
    app.add_option("--invoke", cli.entry, "Exported function to call instead of main/_start");
    try
    {
        app.parse(argc, argv);
    }
    catch (const CLI::CallForHelp& e)
    {
        return app.exit(e);
    }
    catch (const CLI::ParseError& e)
    {
        app.exit(e);
        return wprobe::exit_usage;
    }

    if (cli.list)
    {
        for (const auto& m : wprobe::list_monitors())
            std::printf("%-10s %s\n", std::string(m.name).c_str(), std::string(m.description).c_str());
        return 0;
    }
    if (cli.module_path.empty())
        return fail(wprobe::exit_usage, "error: no module given (see --help)");

    std::vector<uint8_t> bytes;
    try
    {
        bytes = wprobe::read_file(cli.module_path);
    }
    catch (const std::exception& e)
    {
        return fail(wprobe::exit_usage, std::string("error: ") + e.what());
    }

    wprobe::RunOptions options;
    options.entry = cli.entry;
    options.args = cli.args;
    options.empty_probes = cli.empty_probes;
    options.program_out = &std::cout;

    if (cli.bench)
    {
        wprobe::BenchOptions bo;
        bo.repetitions = cli.bench;
        bo.empty_probes = cli.empty_probes;
        bo.run = options;
        bo.run.empty_probes = false;
        bo.run.program_out = nullptr;
        const auto result = wprobe::bench(bytes, cli.monitors, bo);
        if (result.failure)
            return finish_run(cli, *result.failure);
        std::cout << wprobe::format_bench(result);
        return 0;
    }

    std::vector<std::unique_ptr<wprobe::Monitor>> monitors;
    try
    {
        monitors = wprobe::create_monitors(cli.monitors, wprobe::MonitorEnv{&std::cerr, &std::cin, &std::cerr});
    }
    catch (const wprobe::UnknownMonitor& e)
    {
        return fail(wprobe::exit_usage, std::string("error: ") + e.what());
    }

    std::unique_ptr<wprobe::DebugServer> server;
    std::unique_ptr<wprobe::Debugger> debugger;
    std::vector<wprobe::Monitor*> ptrs;
    if (cli.debug_port >= 0)
    {
        try
        {
            server = std::make_unique<wprobe::DebugServer>(static_cast<uint16_t>(cli.debug_port));
        }
        catch (const wprobe::Error& e)
        {
            return fail(wprobe::exit_usage, std::string("error: ") + e.what());
        }
        std::cerr << "wprobe: debug server listening on ws://127.0.0.1:" << server->port() << "/debug" << std::endl;
        debugger = std::make_unique<wprobe::Debugger>(server->session());
        ptrs.push_back(debugger.get());
    }
    for (auto& m : monitors)
        ptrs.push_back(m.get());

    const auto result = wprobe::run_module(bytes, ptrs, options);
    std::cout.flush();
    if (server)
        server->finish(result.exit_code, result.reports);
    return finish_run(cli, result);
}
