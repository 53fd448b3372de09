#ifndef TABUCLUST_REGISTRY_HPP
#define TABUCLUST_REGISTRY_HPP

#include <cstddef>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "dataset.hpp"

/**
 * @file registry.hpp
 * @brief Manifest mapping dataset names to CSV files and loading options.
 *
 * Manifest layout (paths are relative to the manifest's directory):
 *
 *     {
 *       "datasets": {
 *         "iris": { "path": "iris.csv", "header": true, "label_column": 4,
 *                   "delimiter": ",", "k": [3], "normalize": "none" }
 *       }
 *     }
 */

namespace tabuclust {

class UnknownDataset : public std::runtime_error {
public:
    explicit UnknownDataset(const std::string& name)
        : std::runtime_error("unknown dataset '" + name + "': not in registry and not a readable file") {}
};

struct RegistryEntry {
    std::string name;
    std::filesystem::path path;
    CsvOptions csv;
    std::vector<std::size_t> k_values;
    Normalization normalization = Normalization::none;
};

class Registry {
public:
    Registry() = default;

    static Registry from_json(const nlohmann::json& doc, const std::filesystem::path& base_dir = {}) {
        Registry reg;
        if (!doc.contains("datasets") || !doc.at("datasets").is_object()) {
            throw std::invalid_argument("registry manifest needs a 'datasets' object");
        }
        for (const auto& [name, e] : doc.at("datasets").items()) {
            RegistryEntry entry;
            entry.name = name;
            entry.path = std::filesystem::path(e.at("path").get<std::string>());
            if (entry.path.is_relative()) {
                entry.path = base_dir / entry.path;
            }
            entry.csv.has_header = e.value("header", false);
            const auto delim = e.value("delimiter", std::string(","));
            if (delim.size() != 1) {
                throw std::invalid_argument("registry entry '" + name + "': delimiter must be one character");
            }
            entry.csv.delimiter = delim.front();
            if (e.contains("label_column") && !e.at("label_column").is_null()) {
                entry.csv.label_column = e.at("label_column").get<std::size_t>();
            }
            entry.k_values = e.value("k", std::vector<std::size_t>{});
            entry.normalization = parse_normalization(e.value("normalize", std::string("none")));
            reg.entries_.emplace(name, std::move(entry));
        }
        return reg;
    }

    static Registry load(const std::filesystem::path& manifest) {
        std::ifstream in(manifest);
        if (!in) {
            throw std::runtime_error("cannot open registry '" + manifest.string() + "'");
        }
        return from_json(nlohmann::json::parse(in), manifest.parent_path());
    }

    const RegistryEntry* find(const std::string& name) const {
        const auto it = entries_.find(name);
        return it == entries_.end() ? nullptr : &it->second;
    }

    const std::map<std::string, RegistryEntry>& entries() const noexcept { return entries_; }

private:
    std::map<std::string, RegistryEntry> entries_;
};

/// Loads a registry entry, keeping the registry name as the dataset name.
inline Dataset load_entry(const RegistryEntry& entry) {
    auto ds = load_csv(entry.path.string(), entry.csv);
    return Dataset(std::vector<double>(ds.values().begin(), ds.values().end()), ds.n(), ds.d(), entry.name,
                   ds.labels());
}

} // namespace tabuclust

#endif
