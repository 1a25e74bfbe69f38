#ifndef KANDY_DATASET_IO_HPP
#define KANDY_DATASET_IO_HPP

#include <string>
#include <vector>

#include "kandy/sampler.hpp"

namespace kandy {

inline constexpr const char* kGeneratorVersion = "0.1.0";
inline constexpr const char* kCsvHeader = "sample_id,task_id,label,supervised,symbol,image_path";

struct ManifestTask {
    int task_id = 0;
    size_t symbols = 0;
    RejectionCounters rejections;
    bool replacement_mode = false;
    size_t train = 0, val = 0, test = 0;
};

struct Manifest {
    std::string version = kGeneratorVersion;
    uint64_t seed = 0;
    std::string config_digest;  // sha256 of the config bytes
    std::vector<ManifestTask> tasks;
};

std::string sha256_hex(const std::string& bytes);

void write_manifest(const std::string& path, const Manifest& manifest);
Manifest read_manifest(const std::string& path);

/// Writes train.csv / val.csv / test.csv at the dataset root. Fields with
/// commas or quotes (the symbol column) get RFC-4180 quoting.
void write_annotation_csvs(const std::string& out_dir, const std::vector<SampleRecord>& records);

/// Reads one annotation CSV; malformed rows raise ParseError with the row
/// number.
std::vector<SampleRecord> read_annotation_csv(const std::string& path, Split split);

struct Dataset {
    Manifest manifest;
    std::vector<SampleRecord> records;
    std::string root;

    std::string image_file(const SampleRecord& rec) const { return root + "/" + rec.image_path; }
};

/// Loads manifest + CSVs; verifies per-split counts against the manifest.
/// Images stay on disk (lazy access via image_file).
Dataset read_dataset(const std::string& dir);

/// Full audit: rule consistency of every annotated symbol (when the task
/// has a rule in `cfg`), split disjointness at the canonical-string level,
/// image file presence. Returns human-readable violations; empty = clean.
std::vector<std::string> audit_dataset(const Dataset& dataset, const CurriculumConfig& cfg);

}  // namespace kandy

#endif
