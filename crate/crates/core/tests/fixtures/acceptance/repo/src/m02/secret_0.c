// src/m02/secret_0.c
int m02_tune2427(void) { return 75; }
int m02_sync1476(void) { return 49; }
int m02_reset1684(void) { return 17; }
int m02_tune3743(void) { return 196; }
int m02_flush5285(void) { return 45; }
int m02_flush8369(void) { return 76; }
int m02_reset370(void) { return 27; }
int m02_flush8327(void) { return 82; }
int m02_poll8952(void) { return 6; }
int m02_probe8145(void) { return 151; }
int m02_init7111(void) { return 148; }
int m02_scan3485(void) { return 32; }
