#include "kandy/dataset_io.hpp"

#include <openssl/evp.h>

#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "kandy/errors.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace kandy {

std::string sha256_hex(const std::string& bytes) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (!EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr)) {
        throw Error("sha256 digest failed");
    }
    static const char* hex = "0123456789abcdef";
    std::string out;
    out.reserve(len * 2);
    for (unsigned int i = 0; i < len; ++i) {
        out += hex[digest[i] >> 4];
        out += hex[digest[i] & 0xf];
    }
    return out;
}

void write_manifest(const std::string& path, const Manifest& manifest) {
    json tasks = json::array();
    for (const auto& t : manifest.tasks) {
        tasks.push_back({
            {"task_id", t.task_id},
            {"symbols", t.symbols},
            {"rejections",
             {{"by_repetition", t.rejections.by_repetition},
              {"by_rule", t.rejections.by_rule},
              {"by_empty_descriptor", t.rejections.by_empty_descriptor}}},
            {"replacement_mode", t.replacement_mode},
            {"counts", {{"train", t.train}, {"val", t.val}, {"test", t.test}}},
        });
    }
    json doc = {
        {"version", manifest.version},
        {"seed", manifest.seed},
        {"config_digest", manifest.config_digest},
        {"tasks", tasks},
    };
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write manifest '" + path + "'");
    out << doc.dump(2) << "\n";
}

Manifest read_manifest(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open manifest '" + path + "'");
    json doc;
    try {
        in >> doc;
    } catch (const json::exception& e) {
        throw ParseError("manifest '" + path + "': " + e.what());
    }
    Manifest m;
    m.version = doc.at("version").get<std::string>();
    m.seed = doc.at("seed").get<uint64_t>();
    m.config_digest = doc.at("config_digest").get<std::string>();
    for (const auto& t : doc.at("tasks")) {
        ManifestTask mt;
        mt.task_id = t.at("task_id").get<int>();
        mt.symbols = t.at("symbols").get<size_t>();
        mt.rejections.by_repetition = t.at("rejections").at("by_repetition").get<uint64_t>();
        mt.rejections.by_rule = t.at("rejections").at("by_rule").get<uint64_t>();
        mt.rejections.by_empty_descriptor =
            t.at("rejections").at("by_empty_descriptor").get<uint64_t>();
        mt.replacement_mode = t.at("replacement_mode").get<bool>();
        mt.train = t.at("counts").at("train").get<size_t>();
        mt.val = t.at("counts").at("val").get<size_t>();
        mt.test = t.at("counts").at("test").get<size_t>();
        m.tasks.push_back(mt);
    }
    return m;
}

namespace {

std::string csv_field(const std::string& value) {
    if (value.find_first_of(",\"\n\r") == std::string::npos) return value;
    std::string out = "\"";
    for (char c : value) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

// RFC-4180 row splitter; returns false on EOF.
bool read_csv_row(std::istream& in, std::vector<std::string>& fields) {
    fields.clear();
    std::string field;
    bool quoted = false;
    bool any = false;
    int c;
    while ((c = in.get()) != EOF) {
        any = true;
        char ch = static_cast<char>(c);
        if (quoted) {
            if (ch == '"') {
                if (in.peek() == '"') {
                    in.get();
                    field += '"';
                } else {
                    quoted = false;
                }
            } else {
                field += ch;
            }
            continue;
        }
        if (ch == '"' && field.empty()) {
            quoted = true;
        } else if (ch == ',') {
            fields.push_back(std::move(field));
            field.clear();
        } else if (ch == '\n') {
            fields.push_back(std::move(field));
            return true;
        } else if (ch == '\r') {
            // swallow; newline follows
        } else {
            field += ch;
        }
    }
    if (!any) return false;
    fields.push_back(std::move(field));
    return true;
}

}  // namespace

void write_annotation_csvs(const std::string& out_dir, const std::vector<SampleRecord>& records) {
    for (Split split : {Split::train, Split::val, Split::test}) {
        std::string path = out_dir + "/" + std::string(to_string(split)) + ".csv";
        std::ofstream out(path, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot write '" + path + "'");
        out << kCsvHeader << "\n";
        for (const auto& rec : records) {
            if (rec.split != split) continue;
            out << csv_field(rec.sample_id) << ',' << rec.task_id << ',' << rec.label << ','
                << (rec.supervised ? 1 : 0) << ',' << csv_field(rec.symbol) << ','
                << csv_field(rec.image_path) << "\n";
        }
        if (!out) throw IoError("write failed for '" + path + "'");
    }
}

std::vector<SampleRecord> read_annotation_csv(const std::string& path, Split split) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path + "'");
    std::vector<std::string> fields;
    if (!read_csv_row(in, fields) || fields.size() != 6) {
        throw ParseError(path + ": missing or malformed header");
    }
    std::vector<SampleRecord> records;
    size_t row = 1;
    while (read_csv_row(in, fields)) {
        ++row;
        if (fields.size() == 1 && fields[0].empty()) continue;  // trailing newline
        if (fields.size() != 6) {
            throw ParseError(path + ": row " + std::to_string(row) + ": expected 6 fields, got " +
                             std::to_string(fields.size()));
        }
        SampleRecord rec;
        rec.sample_id = fields[0];
        try {
            rec.task_id = std::stoi(fields[1]);
            int label = std::stoi(fields[2]);
            int supervised = std::stoi(fields[3]);
            if ((label != 0 && label != 1) || (supervised != 0 && supervised != 1)) {
                throw std::invalid_argument("domain");
            }
            rec.label = label;
            rec.supervised = supervised == 1;
        } catch (const std::exception&) {
            throw ParseError(path + ": row " + std::to_string(row) +
                             ": label/supervised fields must be 0 or 1");
        }
        rec.split = split;
        rec.symbol = fields[4];
        rec.image_path = fields[5];
        records.push_back(std::move(rec));
    }
    return records;
}

Dataset read_dataset(const std::string& dir) {
    Dataset ds;
    ds.root = dir;
    ds.manifest = read_manifest(dir + "/manifest.json");
    std::map<int, std::array<size_t, 3>> counts;
    for (Split split : {Split::train, Split::val, Split::test}) {
        auto rows = read_annotation_csv(dir + "/" + std::string(to_string(split)) + ".csv", split);
        for (auto& rec : rows) {
            counts[rec.task_id][static_cast<size_t>(split)]++;
            ds.records.push_back(std::move(rec));
        }
    }
    for (const auto& t : ds.manifest.tasks) {
        auto it = counts.find(t.task_id);
        std::array<size_t, 3> got = it == counts.end() ? std::array<size_t, 3>{0, 0, 0} : it->second;
        if (got[0] != t.train || got[1] != t.val || got[2] != t.test) {
            throw IoError("task " + std::to_string(t.task_id) +
                          ": CSV row counts disagree with manifest");
        }
    }
    return ds;
}

std::vector<std::string> audit_dataset(const Dataset& dataset, const CurriculumConfig& cfg) {
    std::vector<std::string> problems;

    std::map<int, std::optional<RuleSet>> rules;
    for (const auto& task : cfg.tasks) {
        if (!task.rule_text.empty()) rules[task.task_id] = RuleSet::compile(task.rule_text);
    }

    // Per task: canonical strings seen per split, for disjointness.
    std::map<int, std::array<std::set<std::string>, 3>> split_symbols;

    for (const auto& rec : dataset.records) {
        split_symbols[rec.task_id][static_cast<size_t>(rec.split)].insert(rec.symbol);

        std::optional<SymbolTree> tree;
        try {
            tree = from_canonical(rec.symbol);
        } catch (const ParseError& e) {
            problems.push_back(rec.sample_id + ": symbol does not parse: " + e.what());
        }
        auto it = rules.find(rec.task_id);
        if (tree && it != rules.end() && it->second) {
            bool satisfied = it->second->holds(*tree);
            if (satisfied != (rec.label == 1)) {
                problems.push_back(rec.sample_id + ": label " + std::to_string(rec.label) +
                                   " disagrees with rule verdict on " + rec.symbol);
            }
        }
        if (!fs::exists(dataset.image_file(rec))) {
            problems.push_back(rec.sample_id + ": missing image file " + rec.image_path);
        }
    }

    for (const auto& [task_id, by_split] : split_symbols) {
        auto check = [&](Split a, Split b) {
            const auto& sa = by_split[static_cast<size_t>(a)];
            const auto& sb = by_split[static_cast<size_t>(b)];
            for (const auto& s : sa) {
                if (sb.count(s)) {
                    problems.push_back("task " + std::to_string(task_id) + ": symbol leaks between " +
                                       std::string(to_string(a)) + " and " +
                                       std::string(to_string(b)) + ": " + s);
                }
            }
        };
        check(Split::train, Split::val);
        check(Split::train, Split::test);
        check(Split::val, Split::test);
    }
    return problems;
}

}  // namespace kandy
