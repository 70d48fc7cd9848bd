#include "observer/service/store.hpp"

#include <algorithm>
#include <fstream>
#include <random>
#include <sstream>

#include <fmt/format.h>
#include <nlohmann/json.hpp>
#include <spdlog/spdlog.h>

#include "observer/corpus/text.hpp"
#include "observer/csv.hpp"
#include "observer/error.hpp"
#include "observer/service/json.hpp"
#include "observer/service/zip.hpp"

namespace observer::service {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kRecords = "records.jsonl";
constexpr const char* kRejected = "rejected.jsonl";
constexpr const char* kMeta = "session.json";
constexpr const char* kImages = "images";

std::string random_session_id()
{
    static std::mutex mutex;
    static std::mt19937_64 rng{std::random_device{}()};
    std::lock_guard lock(mutex);
    return fmt::format("s{:012x}", rng() & 0xffffffffffffULL);
}

void append_line(const fs::path& file, const std::string& line)
{
    std::ofstream out(file, std::ios::app | std::ios::binary);
    out << line << '\n';
    out.flush();
    if (!out) throw Error("failed to append to " + file.string());
}

template <typename T>
std::vector<T> read_log(const fs::path& file)
{
    std::vector<T> out;
    std::ifstream in(file, std::ios::binary);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        try {
            out.push_back(json::parse(line).get<T>());
        } catch (const std::exception& e) {
            spdlog::warn("session store: skipping unreadable line {} of {}: {}", line_no,
                         file.string(), e.what());
        }
    }
    return out;
}

std::string format_number(double v)
{
    return fmt::format("{}", v);
}

double parse_number(const std::string& s)
{
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw FormatError("not a number: " + s);
    return v;
}

}  // namespace

struct SessionStore::Session {
    std::string id;
    std::string created_at;
    fs::path dir;
    std::size_t next_seq = 1;
    // Guards next_seq and the files; the snapshots are swapped under it
    // and copied out by readers.
    mutable std::mutex mutex;
    std::shared_ptr<const std::vector<SessionEntry>> entries =
        std::make_shared<std::vector<SessionEntry>>();
    std::shared_ptr<const std::vector<RejectedObservation>> rejected =
        std::make_shared<std::vector<RejectedObservation>>();
};

SessionStore::SessionStore(fs::path data_dir) : root_(std::move(data_dir))
{
    fs::create_directories(root_ / "sessions");
    load_existing();
}

SessionStore::~SessionStore() = default;

void SessionStore::load_existing()
{
    for (const auto& item : fs::directory_iterator(root_ / "sessions")) {
        if (!item.is_directory()) continue;
        const auto meta_file = item.path() / kMeta;
        if (!fs::exists(meta_file)) continue;
        auto s = std::make_unique<Session>();
        try {
            std::ifstream in(meta_file);
            const auto meta = json::parse(in);
            s->id = meta.at("session_id").get<std::string>();
            s->created_at = meta.at("created_at").get<std::string>();
        } catch (const std::exception& e) {
            spdlog::warn("session store: ignoring {}: {}", item.path().string(), e.what());
            continue;
        }
        s->dir = item.path();
        auto entries = read_log<SessionEntry>(s->dir / kRecords);
        auto rejected = read_log<RejectedObservation>(s->dir / kRejected);
        s->next_seq = entries.size() + rejected.size() + 1;
        s->entries = std::make_shared<std::vector<SessionEntry>>(std::move(entries));
        s->rejected = std::make_shared<std::vector<RejectedObservation>>(std::move(rejected));
        sessions_.emplace(s->id, std::move(s));
    }
}

std::string SessionStore::create_session()
{
    std::unique_lock lock(sessions_mutex_);
    std::string id;
    do {
        id = random_session_id();
    } while (sessions_.contains(id) || fs::exists(root_ / "sessions" / id));
    auto s = std::make_unique<Session>();
    s->id = id;
    s->created_at = utc_timestamp();
    s->dir = root_ / "sessions" / id;
    fs::create_directories(s->dir / kImages);
    {
        std::ofstream out(s->dir / kMeta);
        out << json{{"session_id", s->id}, {"created_at", s->created_at}}.dump() << '\n';
        if (!out) throw Error("failed to create session directory " + s->dir.string());
    }
    sessions_.emplace(id, std::move(s));
    return id;
}

bool SessionStore::contains(const std::string& session_id) const
{
    std::shared_lock lock(sessions_mutex_);
    return sessions_.contains(session_id);
}

std::vector<std::string> SessionStore::session_ids() const
{
    std::shared_lock lock(sessions_mutex_);
    std::vector<std::string> ids;
    for (const auto& [id, _] : sessions_) ids.push_back(id);
    return ids;
}

SessionStore::Session& SessionStore::session(const std::string& session_id) const
{
    std::shared_lock lock(sessions_mutex_);
    const auto it = sessions_.find(session_id);
    if (it == sessions_.end()) throw NotFoundError("unknown session: " + session_id);
    return *it->second;
}

fs::path SessionStore::session_dir(const std::string& session_id) const
{
    return session(session_id).dir;
}

Observation SessionStore::begin_observation(const std::string& session_id,
                                            const ObservationInput& input)
{
    Session& s = session(session_id);
    Observation obs;
    {
        std::lock_guard lock(s.mutex);
        obs.id = fmt::format("{}-{:05}", s.id, s.next_seq++);
        obs.timestamp = utc_timestamp();
    }
    obs.session_id = s.id;
    obs.student = input.student;
    obs.caption = input.caption;
    obs.coords = input.coords;
    obs.image_ref = fmt::format("{}/{}.png", kImages, obs.id);
    return obs;
}

void SessionStore::append(const SessionEntry& entry, const corpus::RgbImage& image)
{
    Session& s = session(entry.observation.session_id);
    std::lock_guard lock(s.mutex);
    corpus::write_png(image, s.dir / entry.observation.image_ref);
    append_line(s.dir / kRecords, json(entry).dump());
    auto next = std::make_shared<std::vector<SessionEntry>>(*s.entries);
    next->push_back(entry);
    s.entries = std::move(next);
}

void SessionStore::reject(const RejectedObservation& rejected)
{
    Session& s = session(rejected.observation.session_id);
    std::lock_guard lock(s.mutex);
    append_line(s.dir / kRejected, json(rejected).dump());
    auto next = std::make_shared<std::vector<RejectedObservation>>(*s.rejected);
    next->push_back(rejected);
    s.rejected = std::move(next);
}

SessionRecord SessionStore::snapshot(const std::string& session_id) const
{
    const Session& s = session(session_id);
    std::shared_ptr<const std::vector<SessionEntry>> entries;
    {
        std::lock_guard lock(s.mutex);
        entries = s.entries;
    }
    SessionRecord record{s.id, s.created_at, *entries};
    std::stable_sort(record.entries.begin(), record.entries.end(),
                     [](const SessionEntry& a, const SessionEntry& b) {
                         return a.observation.timestamp < b.observation.timestamp;
                     });
    return record;
}

std::vector<RejectedObservation> SessionStore::rejections(const std::string& session_id) const
{
    const Session& s = session(session_id);
    std::lock_guard lock(s.mutex);
    return *s.rejected;
}

const std::vector<std::string>& export_columns()
{
    static const std::vector<std::string> columns = {
        "id",      "timestamp",       "student",           "x",     "y",
        "z",       "yaw",             "pitch",             "student_caption",
        "generated_caption", "score", "keywords",          "verdict",
        "feedback", "image_file"};
    return columns;
}

std::vector<std::string> export_row(const SessionEntry& entry)
{
    const auto& o = entry.observation;
    const auto& r = entry.result;
    return {o.id,
            o.timestamp,
            o.student,
            format_number(o.coords.x),
            format_number(o.coords.y),
            format_number(o.coords.z),
            format_number(o.coords.yaw),
            format_number(o.coords.pitch),
            o.caption,
            r.generated_caption,
            format_number(r.score),
            corpus::join(r.keywords, ";"),
            std::string(feedback::to_string(r.verdict)),
            r.feedback_text,
            fmt::format("{}/{}.png", kImages, o.id)};
}

SessionEntry parse_export_row(const std::vector<std::string>& row)
{
    if (row.size() != export_columns().size()) {
        throw FormatError(fmt::format("export row has {} fields, expected {}", row.size(),
                                      export_columns().size()));
    }
    SessionEntry e;
    auto& o = e.observation;
    auto& r = e.result;
    o.id = row[0];
    o.timestamp = row[1];
    o.student = row[2];
    o.coords = {parse_number(row[3]), parse_number(row[4]), parse_number(row[5]),
                parse_number(row[6]), parse_number(row[7])};
    o.caption = row[8];
    o.image_ref = row[14];
    r.observation_id = o.id;
    r.generated_caption = row[9];
    r.score = parse_number(row[10]);
    std::stringstream keywords(row[11]);
    for (std::string k; std::getline(keywords, k, ';');) r.keywords.push_back(k);
    if (row[12] == feedback::to_string(feedback::Verdict::Pass)) {
        r.verdict = feedback::Verdict::Pass;
    } else if (row[12] == feedback::to_string(feedback::Verdict::Retry)) {
        r.verdict = feedback::Verdict::Retry;
    } else {
        throw FormatError("unknown verdict: " + row[12]);
    }
    r.feedback_text = row[13];
    return e;
}

namespace {

std::string render_csv(const SessionRecord& record)
{
    std::ostringstream out;
    csv::write_row(out, export_columns());
    std::vector<bool> forced(export_columns().size(), false);
    forced[11] = true;
    for (const auto& entry : record.entries) csv::write_row(out, export_row(entry), forced);
    return out.str();
}

std::string read_file(const fs::path& file)
{
    std::ifstream in(file, std::ios::binary);
    if (!in) throw NotFoundError("missing stored image " + file.string());
    std::ostringstream data;
    data << in.rdbuf();
    return data.str();
}

}  // namespace

std::string SessionStore::export_archive(const std::string& session_id) const
{
    const auto record = snapshot(session_id);
    const auto dir = session_dir(session_id);
    ZipWriter zip;
    zip.add("observations.csv", render_csv(record));
    zip.add_directory(kImages);
    for (const auto& entry : record.entries) {
        zip.add(entry.observation.image_ref, read_file(dir / entry.observation.image_ref));
    }
    return zip.finish();
}

void SessionStore::export_directory(const std::string& session_id, const fs::path& out_dir) const
{
    const auto record = snapshot(session_id);
    const auto dir = session_dir(session_id);
    fs::create_directories(out_dir / kImages);
    {
        std::ofstream out(out_dir / "observations.csv", std::ios::binary);
        out << render_csv(record);
    }
    for (const auto& entry : record.entries) {
        fs::copy_file(dir / entry.observation.image_ref, out_dir / entry.observation.image_ref,
                      fs::copy_options::overwrite_existing);
    }
}

}  // namespace observer::service
