#ifndef RKF_VERSION_HPP
#define RKF_VERSION_HPP

namespace rkf {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace rkf

#endif  // RKF_VERSION_HPP
