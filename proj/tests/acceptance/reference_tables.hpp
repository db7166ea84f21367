// Reference rows for the gain-arithmetic checks: per-activity launch-time
// degradation measured over a six-hour horizon without rejuvenation and
// under four remediation configurations (one, two, and three services
// flushed, and periodic full reboot). Columns: Sen slope [ms/s], launch-time
// increase [ms], time to the 200 ms aging failure [h], and the printed
// percentage gains. TTAF and gain columns marked infinite correspond to
// treated runs whose launch-time trend vanished or reversed.
#pragma once

#include <limits>
#include <string>
#include <vector>

namespace agewatch_test {

constexpr double kRefHorizonS = 6.0 * 3600.0;
constexpr double kRefThresholdMs = 200.0;
constexpr double kInfinity = std::numeric_limits<double>::infinity();

struct ReferenceRow {
  std::string activity;
  double base_slope;
  double base_lt_increase;
  double base_ttaf_h;
  double slope;         // treated
  double lt_increase;   // treated
  double ttaf_h;        // treated; infinity when the trend vanished
  double printed_gain_lt;    // percent
  double printed_gain_ttaf;  // percent; infinity excluded from averages
};

struct ReferenceTable {
  std::string id;
  std::vector<ReferenceRow> rows;
  double printed_avg_gain_lt;
  double printed_avg_gain_ttaf;
};

inline const std::vector<ReferenceTable>& reference_tables() {
  static const std::vector<ReferenceTable> tables = {
      {"one_service",
       {
           {"com.android.packageinstaller.permission.ui.GrantPermissionsActivity", 0.002,
            53.660, 22.363, 0.000, 0.000, kInfinity, 100.0, kInfinity},
           {"com.baidu.searchbox.MainActivity", 0.008, 167.181, 7.178, 0.004, 95.974, 12.503,
            43.0, 74.0},
           {"com.moji.mjweather.activity.main.AddCityFirstRunActivity", 0.009, 197.860, 6.065,
            0.006, 120.111, 9.991, 39.0, 65.0},
           {"com.sina.weibo.SplashActivity", 0.004, 95.191, 12.606, 0.003, 57.052, 21.033,
            40.0, 67.0},
           {"com.UCMobile.intlcom.uc.browser.InnerUCMobile", 0.003, 66.033, 18.173, 0.002,
            59.471, 20.178, 10.0, 11.0},
           {"com.youku.phone.ActivityWelcome", 0.011, 237.575, 5.051, 0.008, 179.914, 6.670,
            24.0, 32.0},
           {"com.youku.phonecom.youku.ui.activity.HomePageActivity", 0.010, 225.135, 5.330,
            0.006, 132.039, 9.088, 41.0, 70.0},
       },
       33.0,
       53.0},
      {"two_services",
       {
           {"com.android.packageinstaller.permission.ui.GrantPermissionsActivity", 0.002,
            53.660, 22.363, 0.001, 15.891, 75.514, 70.0, 238.0},
           {"com.baidu.searchbox.MainActivity", 0.008, 167.181, 7.178, 0.003, 74.916, 16.018,
            55.0, 123.0},
           {"com.moji.mjweather.activity.main.AddCityFirstRunActivity", 0.009, 197.860, 6.065,
            0.008, 167.886, 7.148, 15.0, 18.0},
           {"com.sina.weibo.SplashActivity", 0.004, 95.191, 12.606, 0.001, 31.689, 37.868,
            67.0, 200.0},
           {"com.UCMobile.intlcom.uc.browser.InnerUCMobile", 0.003, 66.033, 18.173, 0.003,
            60.879, 19.711, 8.0, 9.0},
           {"com.youku.phone.ActivityWelcome", 0.011, 237.575, 5.051, 0.011, 244.265, 4.912,
            -3.0, -3.0},
           {"com.youku.phonecom.youku.ui.activity.HomePageActivity", 0.010, 225.135, 5.330,
            0.009, 189.597, 6.329, 16.0, 19.0},
       },
       33.0,
       86.0},
      {"three_services",
       {
           {"com.android.packageinstaller.permission.ui.GrantPermissionsActivity", 0.002,
            53.660, 22.363, 0.001, 12.854, 93.356, 76.0, 318.0},
           {"com.baidu.searchbox.MainActivity", 0.008, 167.181, 7.178, -0.004, -82.982,
            kInfinity, 150.0, kInfinity},
           {"com.moji.mjweather.activity.main.AddCityFirstRunActivity", 0.009, 197.860, 6.065,
            0.005, 116.717, 10.281, 41.0, 70.0},
           {"com.sina.weibo.SplashActivity", 0.004, 95.191, 12.606, 0.002, 52.076, 23.043,
            45.0, 83.0},
           {"com.UCMobile.intlcom.uc.browser.InnerUCMobile", 0.003, 66.033, 18.173, 0.001,
            25.160, 47.694, 62.0, 163.0},
           {"com.youku.phone.ActivityWelcome", 0.011, 237.575, 5.051, 0.009, 201.842, 5.945,
            15.0, 18.0},
           {"com.youku.phonecom.youku.ui.activity.HomePageActivity", 0.010, 225.135, 5.330,
            0.006, 121.723, 9.858, 46.0, 85.0},
       },
       62.0,
       123.0},
      {"periodic_reboot",
       {
           {"com.android.packageinstaller.permission.ui.GrantPermissionsActivity", 0.002,
            53.660, 22.363, 0.0005, 11.331, 105.903, 79.0, 374.0},
           {"com.baidu.searchbox.MainActivity", 0.008, 167.181, 7.178, 0.0021, 45.325, 26.476,
            73.0, 269.0},
           {"com.moji.mjweather.activity.main.AddCityFirstRunActivity", 0.009, 197.860, 6.065,
            0.0024, 50.990, 23.534, 74.0, 288.0},
           {"com.sina.weibo.SplashActivity", 0.004, 95.191, 12.606, 0.0010, 22.662, 52.951,
            76.0, 320.0},
           {"com.UCMobile.intlcom.uc.browser.InnerUCMobile", 0.003, 66.033, 18.173, 0.0008,
            16.997, 70.602, 74.0, 288.0},
           {"com.youku.phone.ActivityWelcome", 0.011, 237.575, 5.051, 0.0029, 62.321, 19.255,
            74.0, 281.0},
           {"com.youku.phonecom.youku.ui.activity.HomePageActivity", 0.010, 225.135, 5.330,
            0.0026, 56.656, 21.181, 75.0, 297.0},
       },
       75.0,
       302.0},
  };
  return tables;
}

}  // namespace agewatch_test
