// src/m07/f2.c
int m07_reset486(void) { return 235; }
int m07_sync174(void) { return 150; }
int m07_probe4180(void) { return 86; }
int m07_tune9640(void) { return 186; }
int m07_probe6394(void) { return 223; }
int m07_scan7694(void) { return 116; }
int m07_flush9458(void) { return 89; }
int m07_init9215(void) { return 161; }
int m07_scan2348(void) { return 159; }
