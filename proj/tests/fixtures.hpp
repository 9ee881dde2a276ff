#ifndef ENTANGLE_TEST_FIXTURES_HPP
#define ENTANGLE_TEST_FIXTURES_HPP

#include "entangle/ingest.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <unistd.h>
#include <vector>

namespace fixtures {

// picks[t][m]; "" means abstain.
inline entangle::ResponseDataset grid(const std::vector<std::string>& models,
                                      const std::vector<std::vector<std::string>>& options,
                                      const std::vector<std::string>& correct,
                                      const std::vector<std::vector<std::string>>& picks)
{
    std::vector<entangle::ResponseRecord> recs;
    for (std::size_t t = 0; t < picks.size(); ++t)
        for (std::size_t m = 0; m < models.size(); ++m) {
            entangle::ResponseRecord r;
            r.task_id = "t" + std::to_string(t + 1);
            r.model_id = models[m];
            r.options = options[t];
            r.correct_option = correct[t];
            if (!picks[t][m].empty())
                r.selected_option = picks[t][m];
            recs.push_back(r);
        }
    return entangle::build_dataset(recs);
}

inline std::filesystem::path scratch(const std::string& name)
{
    auto dir = std::filesystem::temp_directory_path() / ("entangle_test_" + std::to_string(::getpid()));
    std::filesystem::create_directories(dir);
    return dir / name;
}

inline std::string slurp(const std::filesystem::path& p)
{
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline void spit(const std::filesystem::path& p, const std::string& text)
{
    std::ofstream out(p, std::ios::binary);
    out << text;
}

} // namespace fixtures

#endif
