#pragma once

#include "dnsp/imaging.hpp"
#include "dnsp/training.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace dnsp {

/// Everything a training run depends on. Text form is one `key = value` per line,
/// `#` starts a comment.
struct RunConfig {
    HyperParams hp;
    DegradationSpec degradation;
    std::string profile = "srcnn-915";
    std::size_t patch_size = 40;
    std::size_t stride = 40;
    double fraction = 1.0;
    std::string data_dir;
    std::string val_dir; ///< optional held-out images scored each epoch
    std::string out_dir;

    /// Throws ConfigError on an unknown key or a malformed value.
    void set(const std::string& key, const std::string& value);
    void validate() const;
    /// Canonical text; parsing it back reproduces this config exactly.
    [[nodiscard]] std::string to_text() const;

    static const std::vector<std::string>& keys();
};

/// Applies each line of `text` on top of `base`. Errors carry the line number.
RunConfig parse_run_config(const std::string& text, RunConfig base = {});
RunConfig load_run_config(const std::filesystem::path& path, RunConfig base = {});

} // namespace dnsp
