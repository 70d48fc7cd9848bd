#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <shared_mutex>
#include <string>
#include <vector>

#include "observer/corpus/image.hpp"
#include "observer/service/types.hpp"

namespace observer::service {

/// Append-only on-disk session store. Layout under data_dir/sessions/<id>/:
///   session.json     {session_id, created_at}
///   records.jsonl    one SessionEntry per line
///   rejected.jsonl   one RejectedObservation per line
///   images/<obs>.png
/// Existing sessions are reloaded on construction; a torn final line (crash
/// mid-append) is skipped with a warning. Writes to one session are
/// serialized; reads return immutable snapshots.
class SessionStore {
public:
    explicit SessionStore(std::filesystem::path data_dir);
    ~SessionStore();
    SessionStore(const SessionStore&) = delete;
    SessionStore& operator=(const SessionStore&) = delete;

    std::string create_session();
    bool contains(const std::string& session_id) const;
    std::vector<std::string> session_ids() const;

    /// Reserves a fresh observation id and server timestamp. Throws
    /// NotFoundError for unknown sessions.
    Observation begin_observation(const std::string& session_id, const ObservationInput& input);

    /// Persists the image (re-encoded as PNG) and the entry.
    void append(const SessionEntry& entry, const corpus::RgbImage& image);
    void reject(const RejectedObservation& rejected);

    /// Entries sorted by timestamp (append order on ties).
    SessionRecord snapshot(const std::string& session_id) const;
    std::vector<RejectedObservation> rejections(const std::string& session_id) const;

    std::filesystem::path session_dir(const std::string& session_id) const;

    /// observations.csv plus images/, as a stored zip archive.
    std::string export_archive(const std::string& session_id) const;
    /// Same content written into `out_dir`.
    void export_directory(const std::string& session_id, const std::filesystem::path& out_dir) const;

private:
    struct Session;
    Session& session(const std::string& session_id) const;
    void load_existing();

    std::filesystem::path root_;
    mutable std::shared_mutex sessions_mutex_;
    std::map<std::string, std::unique_ptr<Session>> sessions_;
};

/// Column order of observations.csv.
const std::vector<std::string>& export_columns();

/// One CSV row per entry, in export column order.
std::vector<std::string> export_row(const SessionEntry& entry);

/// Inverse of export_row (image_ref and session id are not part of a row).
SessionEntry parse_export_row(const std::vector<std::string>& row);

}  // namespace observer::service
