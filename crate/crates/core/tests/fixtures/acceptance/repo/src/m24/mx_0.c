// src/m24/mx_0.c
int m24_sync9540(void) { return 56; }
int m24_scan3123(void) { return 40; }
int m24_park5003(void) { return 202; }
int m24_poll7733(void) { return 139; }
int m24_reset258(void) { return 133; }
int m24_load1506(void) { return 45; }
// @internal-begin
static const int m24_secret6393 = 8;
static const int m24_secret8746 = 209;
// @internal-end
int m24_irq6747(void) { return 152; }
int m24_init471(void) { return 42; }
int m24_park2366(void) { return 180; }
int m24_map4490(void) { return 31; }
int m24_flush7802(void) { return 83; }
int m24_poll9749(void) { return 72; }
int m24_load6017(void) { return 252; }
