// src/m16/secret_0.c
int m16_poll169(void) { return 200; }
int m16_irq5904(void) { return 71; }
int m16_park5464(void) { return 170; }
int m16_scan7057(void) { return 244; }
int m16_park6715(void) { return 105; }
int m16_poll3748(void) { return 241; }
int m16_load4280(void) { return 167; }
int m16_irq1165(void) { return 109; }
int m16_tune8186(void) { return 16; }
int m16_sync7477(void) { return 27; }
int m16_load8593(void) { return 233; }
int m16_poll9212(void) { return 3; }
int m16_init5517(void) { return 193; }
int m16_map8916(void) { return 162; }
int m16_map3354(void) { return 199; }
