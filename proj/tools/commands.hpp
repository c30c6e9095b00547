#pragma once

#include <exception>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "config.hpp"

namespace topowg::cli {

/// One run of one command: resolved configuration, output directory and
/// the files written so far (relative to the output directory).
class Run {
public:
    Run(std::string command, Config config, std::filesystem::path out, int workers);

    const std::string& command() const noexcept { return command_; }
    const Config& config() const noexcept { return config_; }
    const std::filesystem::path& out() const noexcept { return out_; }
    int workers() const noexcept { return workers_; }
    const std::vector<std::string>& outputs() const noexcept { return outputs_; }

    /// Opens out/name for writing, with precision 17, and records it.
    std::ofstream open(const std::string& name);
    void log(const std::string& message) const;

private:
    std::string command_;
    Config config_;
    std::filesystem::path out_;
    int workers_;
    std::vector<std::string> outputs_;
};

/// CSV layout of each command, shown in --help.
std::string csv_schema(const std::string& command);

/// Exit status and error kind for an exception escaping execute():
/// validation errors give 1, numerical and other failures give 2.
struct ErrorClass {
    std::string kind;
    int exit_code;
};
ErrorClass classify(const std::exception& e);

/// Runs the command and writes its CSV files. Throws ParameterError on
/// invalid input and NumericalError on solver failure.
void execute(Run& run);

}  // namespace topowg::cli
