#include "lucid/context.hpp"

#include "lucid/codec.hpp"
#include "lucid/errors.hpp"

#include <algorithm>

namespace lucid {

nlohmann::json profile_to_json(const UserProfile& p) {
    return {{"id", p.id},
            {"name", p.user_name},
            {"technicality", std::string(to_string(p.technicality))},
            {"role", std::string(to_string(p.role))}};
}

UserProfile profile_from_json(const nlohmann::json& j) {
    UserProfile p;
    p.id = codec::require_string(j, "id");
    p.user_name = codec::require_string(j, "name");
    p.technicality = parse_technicality(codec::require_string(j, "technicality"));
    p.role = parse_role(codec::require_string(j, "role"));
    if (p.id.empty()) fail(ErrorCode::Validation, "user id must not be empty");
    return p;
}

void UserDirectory::put(UserProfile profile) {
    std::unique_lock lock(mutex_);
    users_[profile.id] = std::move(profile);
}

std::optional<UserProfile> UserDirectory::get(const UserId& id) const {
    std::shared_lock lock(mutex_);
    const auto it = users_.find(id);
    if (it == users_.end()) return std::nullopt;
    return it->second;
}

std::vector<UserProfile> UserDirectory::all() const {
    std::shared_lock lock(mutex_);
    std::vector<UserProfile> out;
    for (const auto& [id, p] : users_) out.push_back(p);
    return out;
}

void UserDirectory::import_json(const nlohmann::json& doc) {
    const auto& list = doc.is_object() ? codec::require(doc, "users") : doc;
    if (!list.is_array()) fail(ErrorCode::Validation, "user document must hold an array");
    for (const auto& j : list) put(profile_from_json(j));
}

nlohmann::json UserDirectory::to_json() const {
    nlohmann::json out = nlohmann::json::array();
    for (const auto& p : all()) out.push_back(profile_to_json(p));
    return out;
}

void MemoryHistoryStore::append(const HistoryEntry& entry) {
    std::lock_guard lock(mutex_);
    entries_.push_back(entry);
}

std::vector<HistoryEntry> MemoryHistoryStore::entries(const UserId& user,
                                                      const ExplanandumKey& key) const {
    std::lock_guard lock(mutex_);
    std::vector<HistoryEntry> out;
    for (const auto& e : entries_)
        if (e.user == user && e.key == key) out.push_back(e);
    return out;
}

std::vector<HistoryEntry> MemoryHistoryStore::all() const {
    std::lock_guard lock(mutex_);
    return entries_;
}

namespace {

nlohmann::json entry_to_json(const HistoryEntry& e) {
    return {{"user", e.user},
            {"entity", e.key.entity},
            {"action", e.key.action},
            {"explained_at", format_iso8601(e.explained_at)}};
}

HistoryEntry entry_from_json(const nlohmann::json& j) {
    return {codec::require_string(j, "user"),
            {codec::require_string(j, "entity"), codec::require_string(j, "action")},
            codec::require_time(j, "explained_at")};
}

} // namespace

FileHistoryStore::FileHistoryStore(std::filesystem::path path) : path_(std::move(path)) {
    {
        std::ifstream in(path_);
        std::string line;
        while (std::getline(in, line))
            if (!line.empty())
                cache_.append(entry_from_json(codec::parse_document(line, "history line")));
    }
    out_.open(path_, std::ios::app);
    if (!out_) fail(ErrorCode::Storage, "cannot open history file " + path_.string());
}

void FileHistoryStore::append(const HistoryEntry& entry) {
    std::lock_guard lock(write_mutex_);
    out_ << entry_to_json(entry).dump() << '\n';
    out_.flush();
    if (!out_) fail(ErrorCode::Storage, "write to " + path_.string() + " failed");
    cache_.append(entry);
}

std::vector<HistoryEntry> FileHistoryStore::entries(const UserId& user,
                                                    const ExplanandumKey& key) const {
    return cache_.entries(user, key);
}

std::vector<HistoryEntry> FileHistoryStore::all() const { return cache_.all(); }

Occurrence classify_occurrence(std::size_t prior_count) noexcept {
    if (prior_count == 0) return Occurrence::FirstTime;
    if (prior_count == 1) return Occurrence::SecondTime;
    return Occurrence::More;
}

std::size_t count_in_window(std::span<const HistoryEntry> entries, Timestamp at) {
    const Timestamp floor = at - kOccurrenceWindow;
    return static_cast<std::size_t>(std::count_if(entries.begin(), entries.end(), [&](const auto& e) {
        return e.explained_at > floor && e.explained_at <= at;
    }));
}

void ScheduleStateProvider::add(const UserId& user, ScheduleEntry entry) {
    if (entry.to < entry.from) fail(ErrorCode::Validation, "schedule interval ends before it starts");
    std::unique_lock lock(mutex_);
    schedules_[user].push_back(entry);
}

void ScheduleStateProvider::replace(const UserId& user, std::vector<ScheduleEntry> entries) {
    for (const auto& e : entries)
        if (e.to < e.from) fail(ErrorCode::Validation, "schedule interval ends before it starts");
    std::unique_lock lock(mutex_);
    schedules_[user] = std::move(entries);
}

std::vector<ScheduleEntry> ScheduleStateProvider::schedule(const UserId& user) const {
    std::shared_lock lock(mutex_);
    const auto it = schedules_.find(user);
    return it == schedules_.end() ? std::vector<ScheduleEntry>{} : it->second;
}

UserState ScheduleStateProvider::fetch(const UserId& user, Timestamp at) {
    std::shared_lock lock(mutex_);
    const auto it = schedules_.find(user);
    if (it == schedules_.end()) return UserState::Working;
    const auto& v = it->second;
    for (auto e = v.rbegin(); e != v.rend(); ++e)
        if (e->from <= at && at < e->to) return e->state;
    return UserState::Working;
}

nlohmann::json schedule_to_json(const std::vector<ScheduleEntry>& entries) {
    nlohmann::json out = nlohmann::json::array();
    for (const auto& e : entries)
        out.push_back({{"from", format_iso8601(e.from)},
                       {"to", format_iso8601(e.to)},
                       {"state", std::string(to_string(e.state))}});
    return out;
}

std::vector<ScheduleEntry> schedule_from_json(const nlohmann::json& j) {
    if (!j.is_array()) fail(ErrorCode::Validation, "schedule must be an array");
    std::vector<ScheduleEntry> out;
    for (const auto& e : j) {
        ScheduleEntry s{codec::require_time(e, "from"), codec::require_time(e, "to"),
                        parse_user_state(codec::require_string(e, "state"))};
        if (s.to < s.from) fail(ErrorCode::Validation, "schedule interval ends before it starts");
        out.push_back(s);
    }
    return out;
}

ContextManager::ContextManager(const UserDirectory& users, HistoryStore& history,
                               StateProvider* provider, ContextOptions options)
    : users_(users), history_(history), provider_(provider), options_(options) {}

UserState ContextManager::fetch_user_state(const UserId& user, Timestamp at) {
    if (!provider_) fail(ErrorCode::ProviderUnavailable, "no user-state provider configured");
    return provider_->fetch(user, at);
}

Occurrence ContextManager::occurrence(const UserId& user, const ExplanandumKey& key,
                                      Timestamp at) const {
    const auto entries = history_.entries(user, key);
    return classify_occurrence(count_in_window(entries, at));
}

SnapshotResult ContextManager::snapshot(const UserId& user, const ExplanandumKey& key,
                                        Timestamp at) {
    const auto profile = users_.get(user);
    if (!profile) fail(ErrorCode::UnknownUser, "unknown user '" + user + "'");

    SnapshotResult out;
    out.snapshot.user_name = profile->user_name;
    out.snapshot.technicality = profile->technicality;
    out.snapshot.role = profile->role;
    out.snapshot.occurrence = occurrence(user, key, at);
    try {
        out.snapshot.user_state = fetch_user_state(user, at);
    } catch (const Error& e) {
        if (e.code() != ErrorCode::ProviderUnavailable || !options_.fallback_on_provider_error)
            throw;
        out.snapshot.user_state = UserState::Working;
        out.degraded = true;
    }
    return out;
}

void ContextManager::record_delivery(const UserId& user, const ExplanandumKey& key, Timestamp at) {
    history_.append({user, key, at});
}

} // namespace lucid
