#pragma once

#include "lucid/domain.hpp"

#include <filesystem>
#include <fstream>
#include <iosfwd>
#include <map>
#include <memory>
#include <shared_mutex>
#include <span>
#include <utility>
#include <vector>

namespace lucid {

using PropertyKey = std::pair<EntityId, std::string>;

// Time-ordered slice of the log. `baseline` holds, per property, the last
// write strictly before `from`, so state can be reconstructed for
// properties that were set before the window and never changed inside it.
struct LogWindow {
    std::vector<EventRecord> records;
    Timestamp from;
    Timestamp to;
    std::map<PropertyKey, EventRecord> baseline;

    // Most recent write with ts < t. With `window_only`, baseline writes and
    // writes before `from` are ignored.
    const EventRecord* last_write_before(const EntityId& entity, const std::string& property,
                                         Timestamp t, bool window_only = false) const;
};

// Persistence behind the log. Stores see records in ingestion order only.
class EventStore {
public:
    virtual ~EventStore() = default;

    virtual void append(const EventRecord& record) = 0;
    // Every persisted record in ingestion order.
    virtual std::vector<EventRecord> load() = 0;
    // Replaces the persisted contents (used by retention trimming).
    virtual void rewrite(std::span<const EventRecord> records) = 0;
};

class MemoryEventStore final : public EventStore {
public:
    void append(const EventRecord& record) override { records_.push_back(record); }
    std::vector<EventRecord> load() override { return records_; }
    void rewrite(std::span<const EventRecord> records) override {
        records_.assign(records.begin(), records.end());
    }

private:
    std::vector<EventRecord> records_;
};

// Append-only newline-delimited JSON file; each line is one log record.
class FileEventStore final : public EventStore {
public:
    explicit FileEventStore(std::filesystem::path path);

    void append(const EventRecord& record) override;
    std::vector<EventRecord> load() override;
    void rewrite(std::span<const EventRecord> records) override;

private:
    std::filesystem::path path_;
    std::ofstream out_;
};

struct EventLogOptions {
    // Records older than now - retention are dropped by trim(), except each
    // property's last write before the cutoff, which still defines its state.
    Millis retention = std::chrono::duration_cast<Millis>(std::chrono::days{90});
};

// Single writer, many readers. Queries return value snapshots.
class EventLog {
public:
    explicit EventLog(std::unique_ptr<EventStore> store = std::make_unique<MemoryEventStore>(),
                      EventLogOptions options = {});

    // Validates, assigns the next sequence number, persists. Returns the sequence number.
    std::uint64_t ingest(EventRecord record);

    LogWindow window(Timestamp from, Timestamp to) const;

    // Last-write-wins value at or before t; nullopt is ABSENT.
    std::optional<Scalar> state_at(const EntityId& entity, const std::string& property,
                                   Timestamp t) const;

    std::vector<EventRecord> all() const;
    std::size_t size() const;
    std::uint64_t last_seq() const;

    // Drops records older than now - retention. Returns the number removed.
    std::size_t trim(Timestamp now);

    // One record per line; see codec::event_to_json for the field set.
    void export_ndjson(std::ostream& out) const;
    std::size_t import_ndjson(std::istream& in);

private:
    void index(const EventRecord& r);
    void rebuild_indexes();

    std::unique_ptr<EventStore> store_;
    EventLogOptions options_;
    mutable std::shared_mutex mutex_;
    std::vector<EventRecord> sorted_;
    std::map<PropertyKey, std::vector<EventRecord>> writes_;
    std::uint64_t next_seq_ = 1;
};

} // namespace lucid
