#include "lucid/event_log.hpp"

#include "lucid/codec.hpp"
#include "lucid/errors.hpp"

#include <algorithm>
#include <istream>
#include <mutex>
#include <ostream>
#include <set>

namespace lucid {

namespace {

// Index of the last element of a (ts, seq)-sorted range with ts < t.
template <class It>
It last_before(It first, It last, Timestamp t) {
    auto it = std::lower_bound(first, last, t,
                               [](const EventRecord& r, Timestamp v) { return r.ts < v; });
    return it == first ? last : std::prev(it);
}

} // namespace

const EventRecord* LogWindow::last_write_before(const EntityId& entity,
                                                const std::string& property, Timestamp t,
                                                bool window_only) const {
    for (auto it = records.rbegin(); it != records.rend(); ++it) {
        if (it->ts >= t) continue;
        if (window_only && it->ts < from) break;
        if (it->kind == EventKind::PropertyChange && it->entity == entity && it->name == property)
            return &*it;
    }
    if (window_only) return nullptr;
    const auto b = baseline.find({entity, property});
    if (b != baseline.end() && b->second.ts < t) return &b->second;
    return nullptr;
}

FileEventStore::FileEventStore(std::filesystem::path path) : path_(std::move(path)) {
    if (path_.has_parent_path()) {
        std::error_code ec;
        std::filesystem::create_directories(path_.parent_path(), ec);
    }
    out_.open(path_, std::ios::app);
    if (!out_) fail(ErrorCode::Storage, "cannot open event log file " + path_.string());
}

void FileEventStore::append(const EventRecord& record) {
    out_ << codec::event_to_line(record) << '\n';
    out_.flush();
    if (!out_) fail(ErrorCode::Storage, "write to " + path_.string() + " failed");
}

std::vector<EventRecord> FileEventStore::load() {
    std::ifstream in(path_);
    std::vector<EventRecord> out;
    std::string line;
    std::size_t n = 0;
    while (std::getline(in, line)) {
        ++n;
        if (line.empty()) continue;
        try {
            out.push_back(codec::event_from_json(codec::parse_document(line, "event log line")));
        } catch (const Error& e) {
            fail(ErrorCode::Storage,
                 path_.string() + ":" + std::to_string(n) + ": corrupt record: " + e.what());
        }
    }
    return out;
}

void FileEventStore::rewrite(std::span<const EventRecord> records) {
    out_.close();
    const auto tmp = path_.string() + ".tmp";
    {
        std::ofstream f(tmp, std::ios::trunc);
        for (const auto& r : records) f << codec::event_to_line(r) << '\n';
        if (!f) fail(ErrorCode::Storage, "write to " + tmp + " failed");
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path_, ec);
    if (ec) fail(ErrorCode::Storage, "rename " + tmp + ": " + ec.message());
    out_.open(path_, std::ios::app);
}

EventLog::EventLog(std::unique_ptr<EventStore> store, EventLogOptions options)
    : store_(std::move(store)), options_(options) {
    sorted_ = store_->load();
    // Sequence numbers follow persisted line order, so a restart reproduces them.
    for (auto& r : sorted_) r.seq = next_seq_++;
    rebuild_indexes();
}

void EventLog::index(const EventRecord& r) {
    const auto pos = std::upper_bound(sorted_.begin(), sorted_.end(), r, log_order);
    sorted_.insert(pos, r);
    if (r.kind == EventKind::PropertyChange) {
        auto& v = writes_[{r.entity, r.name}];
        v.insert(std::upper_bound(v.begin(), v.end(), r, log_order), r);
    }
}

void EventLog::rebuild_indexes() {
    std::stable_sort(sorted_.begin(), sorted_.end(), log_order);
    writes_.clear();
    for (const auto& r : sorted_)
        if (r.kind == EventKind::PropertyChange) writes_[{r.entity, r.name}].push_back(r);
}

std::uint64_t EventLog::ingest(EventRecord record) {
    validate_event(record);
    std::unique_lock lock(mutex_);
    record.seq = next_seq_;
    store_->append(record);
    ++next_seq_;
    index(record);
    return record.seq;
}

LogWindow EventLog::window(Timestamp from, Timestamp to) const {
    if (from > to)
        fail(ErrorCode::Range, "window start " + format_iso8601(from) + " is after end " +
                                   format_iso8601(to));
    std::shared_lock lock(mutex_);
    LogWindow w;
    w.from = from;
    w.to = to;
    const auto lo = std::lower_bound(sorted_.begin(), sorted_.end(), from,
                                     [](const EventRecord& r, Timestamp v) { return r.ts < v; });
    const auto hi = std::upper_bound(sorted_.begin(), sorted_.end(), to,
                                     [](Timestamp v, const EventRecord& r) { return v < r.ts; });
    w.records.assign(lo, hi);
    for (const auto& [key, writes] : writes_) {
        const auto it = last_before(writes.begin(), writes.end(), from);
        if (it != writes.end()) w.baseline.emplace(key, *it);
    }
    return w;
}

std::optional<Scalar> EventLog::state_at(const EntityId& entity, const std::string& property,
                                         Timestamp t) const {
    std::shared_lock lock(mutex_);
    const auto found = writes_.find({entity, property});
    if (found == writes_.end()) return std::nullopt;
    const auto& v = found->second;
    const auto it = std::upper_bound(v.begin(), v.end(), t,
                                     [](Timestamp x, const EventRecord& r) { return x < r.ts; });
    if (it == v.begin()) return std::nullopt;
    return std::prev(it)->value;
}

std::vector<EventRecord> EventLog::all() const {
    std::shared_lock lock(mutex_);
    return sorted_;
}

std::size_t EventLog::size() const {
    std::shared_lock lock(mutex_);
    return sorted_.size();
}

std::uint64_t EventLog::last_seq() const {
    std::shared_lock lock(mutex_);
    return next_seq_ - 1;
}

std::size_t EventLog::trim(Timestamp now) {
    std::unique_lock lock(mutex_);
    const Timestamp cutoff = now - options_.retention;
    std::set<std::uint64_t> keep;
    // The last write before the cutoff still defines state inside the retained range.
    for (const auto& [key, writes] : writes_) {
        const auto it = last_before(writes.begin(), writes.end(), cutoff);
        if (it != writes.end()) keep.insert(it->seq);
    }

    std::vector<EventRecord> kept;
    kept.reserve(sorted_.size());
    for (const auto& r : sorted_)
        if (r.ts >= cutoff || keep.count(r.seq)) kept.push_back(r);
    const std::size_t removed = sorted_.size() - kept.size();
    if (removed == 0) return 0;

    std::vector<EventRecord> by_seq = kept;
    std::sort(by_seq.begin(), by_seq.end(),
              [](const EventRecord& a, const EventRecord& b) { return a.seq < b.seq; });
    store_->rewrite(by_seq);
    sorted_ = std::move(kept);
    rebuild_indexes();
    return removed;
}

void EventLog::export_ndjson(std::ostream& out) const {
    std::shared_lock lock(mutex_);
    for (const auto& r : sorted_) out << codec::event_to_line(r) << '\n';
}

std::size_t EventLog::import_ndjson(std::istream& in) {
    std::string line;
    std::size_t n = 0, count = 0;
    while (std::getline(in, line)) {
        ++n;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        EventRecord r;
        try {
            r = codec::event_from_json(codec::parse_document(line, "log line"));
        } catch (const Error& e) {
            fail(ErrorCode::Validation, "line " + std::to_string(n) + ": " + e.what());
        }
        ingest(std::move(r));
        ++count;
    }
    return count;
}

} // namespace lucid
