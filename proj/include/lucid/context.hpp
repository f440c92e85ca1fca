#pragma once

#include "lucid/domain.hpp"

#include <json.hpp>

#include <compare>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <mutex>
#include <shared_mutex>
#include <span>
#include <vector>

namespace lucid {

struct UserProfile {
    UserId id;
    std::string user_name;
    Technicality technicality = Technicality::Technical;
    Role role = Role::Guest;

    bool operator==(const UserProfile&) const = default;
};

nlohmann::json profile_to_json(const UserProfile& p);
UserProfile profile_from_json(const nlohmann::json& j);

class UserDirectory {
public:
    void put(UserProfile profile);
    std::optional<UserProfile> get(const UserId& id) const;
    std::vector<UserProfile> all() const;

    // Array of profiles or {"users": [...]}.
    void import_json(const nlohmann::json& doc);
    nlohmann::json to_json() const;

private:
    mutable std::shared_mutex mutex_;
    std::map<UserId, UserProfile> users_;
};

struct ExplanandumKey {
    EntityId entity;
    std::string action;

    auto operator<=>(const ExplanandumKey&) const = default;
};

struct HistoryEntry {
    UserId user;
    ExplanandumKey key;
    Timestamp explained_at;
};

class HistoryStore {
public:
    virtual ~HistoryStore() = default;
    virtual void append(const HistoryEntry& entry) = 0;
    virtual std::vector<HistoryEntry> entries(const UserId& user, const ExplanandumKey& key) const = 0;
    virtual std::vector<HistoryEntry> all() const = 0;
};

class MemoryHistoryStore final : public HistoryStore {
public:
    void append(const HistoryEntry& entry) override;
    std::vector<HistoryEntry> entries(const UserId& user, const ExplanandumKey& key) const override;
    std::vector<HistoryEntry> all() const override;

private:
    mutable std::mutex mutex_;
    std::vector<HistoryEntry> entries_;
};

// NDJSON file; one {user, entity, action, explained_at} object per line.
class FileHistoryStore final : public HistoryStore {
public:
    explicit FileHistoryStore(std::filesystem::path path);
    void append(const HistoryEntry& entry) override;
    std::vector<HistoryEntry> entries(const UserId& user, const ExplanandumKey& key) const override;
    std::vector<HistoryEntry> all() const override;

private:
    std::filesystem::path path_;
    MemoryHistoryStore cache_;
    std::ofstream out_;
    std::mutex write_mutex_;
};

inline constexpr std::chrono::days kOccurrenceWindow{90};

// 0 -> FIRST_TIME, 1 -> SECOND_TIME, 2+ -> MORE.
Occurrence classify_occurrence(std::size_t prior_count) noexcept;

// Entries with explained_at in (at - 90 days, at].
std::size_t count_in_window(std::span<const HistoryEntry> entries, Timestamp at);

// Source of the dynamic user state. Throws Error(ProviderUnavailable).
class StateProvider {
public:
    virtual ~StateProvider() = default;
    virtual UserState fetch(const UserId& user, Timestamp at) = 0;
};

struct ScheduleEntry {
    Timestamp from;
    Timestamp to;
    UserState state = UserState::Working;
};

// Calendar-style provider: intervals are half-open [from, to). When several
// intervals contain the instant, the one added last wins. No match -> WORKING.
class ScheduleStateProvider final : public StateProvider {
public:
    void add(const UserId& user, ScheduleEntry entry);
    void replace(const UserId& user, std::vector<ScheduleEntry> entries);
    std::vector<ScheduleEntry> schedule(const UserId& user) const;
    UserState fetch(const UserId& user, Timestamp at) override;

private:
    mutable std::shared_mutex mutex_;
    std::map<UserId, std::vector<ScheduleEntry>> schedules_;
};

nlohmann::json schedule_to_json(const std::vector<ScheduleEntry>& entries);
std::vector<ScheduleEntry> schedule_from_json(const nlohmann::json& j);

// Remote provider: GET {base}/state?user=<id>&at=<iso> -> {"state": "BREAK"}.
class HttpStateProvider final : public StateProvider {
public:
    explicit HttpStateProvider(std::string base_url, Millis timeout = Millis{2000});
    UserState fetch(const UserId& user, Timestamp at) override;

private:
    std::string base_url_;
    Millis timeout_;
};

struct ContextOptions {
    // On provider failure fall back to WORKING and flag the snapshot degraded.
    bool fallback_on_provider_error = true;
};

struct SnapshotResult {
    ContextSnapshot snapshot;
    bool degraded = false;
};

class ContextManager {
public:
    ContextManager(const UserDirectory& users, HistoryStore& history, StateProvider* provider,
                   ContextOptions options = {});

    // Throws Error(UnknownUser), or Error(ProviderUnavailable) without fallback.
    SnapshotResult snapshot(const UserId& user, const ExplanandumKey& key, Timestamp at);

    void record_delivery(const UserId& user, const ExplanandumKey& key, Timestamp at);

    UserState fetch_user_state(const UserId& user, Timestamp at);

    Occurrence occurrence(const UserId& user, const ExplanandumKey& key, Timestamp at) const;

private:
    const UserDirectory& users_;
    HistoryStore& history_;
    StateProvider* provider_;
    ContextOptions options_;
};

} // namespace lucid
