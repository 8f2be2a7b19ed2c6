#pragma once

#include "ccep/numerics.hpp"

#include <cstdint>
#include <random>
#include <stdexcept>
#include <vector>

namespace ccep {

// (s, z, a, r, s', z', done). `done` marks genuine termination only; a
// time-limit truncation is stored with done = false.
struct Transition {
    std::vector<double> s;
    int z = 0;
    std::vector<double> a;
    double r = 0.0;
    std::vector<double> s_next;
    int z_next = 0;
    bool done = false;

    bool operator==(const Transition&) const = default;
};

// Row-stacked minibatch.
struct Batch {
    Matrix states;
    std::vector<int> skills;
    Matrix actions;
    Vector rewards;
    Matrix next_states;
    std::vector<int> next_skills;
    Vector dones;

    std::size_t size() const { return skills.size(); }
};

class ReplayBuffer {
public:
    explicit ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
        if (capacity == 0) throw std::invalid_argument("ReplayBuffer: capacity must be >= 1");
    }

    std::size_t capacity() const { return capacity_; }
    std::size_t size() const { return size_; }
    bool empty() const { return size_ == 0; }
    std::size_t obs_dim() const { return obs_dim_; }
    std::size_t act_dim() const { return act_dim_; }

    void push(const Transition& t) {
        if (size_ == 0 && storage_empty()) {
            if (t.s.empty() || t.a.empty()) throw std::invalid_argument("ReplayBuffer: empty observation or action");
            obs_dim_ = t.s.size();
            act_dim_ = t.a.size();
        }
        if (t.s.size() != obs_dim_ || t.s_next.size() != obs_dim_ || t.a.size() != act_dim_)
            throw std::invalid_argument("ReplayBuffer: transition dimensions differ from stored transitions");

        const std::size_t slot = cursor_;
        if (skills_.size() < capacity_) {
            states_.insert(states_.end(), t.s.begin(), t.s.end());
            actions_.insert(actions_.end(), t.a.begin(), t.a.end());
            next_states_.insert(next_states_.end(), t.s_next.begin(), t.s_next.end());
            rewards_.push_back(t.r);
            skills_.push_back(t.z);
            next_skills_.push_back(t.z_next);
            dones_.push_back(t.done ? 1 : 0);
        } else {
            std::copy(t.s.begin(), t.s.end(), states_.begin() + static_cast<std::ptrdiff_t>(slot * obs_dim_));
            std::copy(t.a.begin(), t.a.end(), actions_.begin() + static_cast<std::ptrdiff_t>(slot * act_dim_));
            std::copy(t.s_next.begin(), t.s_next.end(), next_states_.begin() + static_cast<std::ptrdiff_t>(slot * obs_dim_));
            rewards_[slot] = t.r;
            skills_[slot] = t.z;
            next_skills_[slot] = t.z_next;
            dones_[slot] = t.done ? 1 : 0;
        }
        cursor_ = (cursor_ + 1) % capacity_;
        if (size_ < capacity_) ++size_;
    }

    // Storage slot order; slot i is not necessarily the i-th oldest.
    Transition at(std::size_t slot) const {
        if (slot >= size_) throw std::out_of_range("ReplayBuffer::at: slot out of range");
        Transition t;
        t.s.assign(states_.begin() + static_cast<std::ptrdiff_t>(slot * obs_dim_),
                   states_.begin() + static_cast<std::ptrdiff_t>((slot + 1) * obs_dim_));
        t.a.assign(actions_.begin() + static_cast<std::ptrdiff_t>(slot * act_dim_),
                   actions_.begin() + static_cast<std::ptrdiff_t>((slot + 1) * act_dim_));
        t.s_next.assign(next_states_.begin() + static_cast<std::ptrdiff_t>(slot * obs_dim_),
                        next_states_.begin() + static_cast<std::ptrdiff_t>((slot + 1) * obs_dim_));
        t.r = rewards_[slot];
        t.z = skills_[slot];
        t.z_next = next_skills_[slot];
        t.done = dones_[slot] != 0;
        return t;
    }

    // Contents from oldest to newest.
    std::vector<Transition> contents() const {
        std::vector<Transition> out;
        out.reserve(size_);
        const std::size_t oldest = size_ < capacity_ ? 0 : cursor_;
        for (std::size_t i = 0; i < size_; ++i) out.push_back(at((oldest + i) % capacity_));
        return out;
    }

    // Uniform draws with replacement.
    template <typename Rng>
    std::vector<std::size_t> sample_indices(std::size_t batch_size, Rng& rng) const {
        if (size_ == 0) throw std::logic_error("ReplayBuffer::sample: buffer is empty");
        std::uniform_int_distribution<std::size_t> pick(0, size_ - 1);
        std::vector<std::size_t> idx(batch_size);
        for (auto& i : idx) i = pick(rng);
        return idx;
    }

    Batch gather(const std::vector<std::size_t>& idx) const {
        const auto n = static_cast<Eigen::Index>(idx.size());
        const auto od = static_cast<Eigen::Index>(obs_dim_);
        const auto ad = static_cast<Eigen::Index>(act_dim_);
        Batch b{Matrix(n, od), std::vector<int>(idx.size()), Matrix(n, ad), Vector(n),
                Matrix(n, od), std::vector<int>(idx.size()), Vector(n)};
        for (Eigen::Index row = 0; row < n; ++row) {
            const std::size_t k = idx[static_cast<std::size_t>(row)];
            for (Eigen::Index c = 0; c < od; ++c) {
                b.states(row, c) = states_[k * obs_dim_ + static_cast<std::size_t>(c)];
                b.next_states(row, c) = next_states_[k * obs_dim_ + static_cast<std::size_t>(c)];
            }
            for (Eigen::Index c = 0; c < ad; ++c) b.actions(row, c) = actions_[k * act_dim_ + static_cast<std::size_t>(c)];
            b.rewards(row) = rewards_[k];
            b.dones(row) = dones_[k];
            b.skills[static_cast<std::size_t>(row)] = skills_[k];
            b.next_skills[static_cast<std::size_t>(row)] = next_skills_[k];
        }
        return b;
    }

    template <typename Rng>
    Batch sample(std::size_t batch_size, Rng& rng) const {
        return gather(sample_indices(batch_size, rng));
    }

private:
    bool storage_empty() const { return skills_.empty(); }

    std::size_t capacity_;
    std::size_t size_ = 0;
    std::size_t cursor_ = 0;
    std::size_t obs_dim_ = 0;
    std::size_t act_dim_ = 0;
    std::vector<double> states_, actions_, next_states_, rewards_;
    std::vector<int> skills_, next_skills_;
    std::vector<std::uint8_t> dones_;
};

}  // namespace ccep
