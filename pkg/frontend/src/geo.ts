/**
 * Where is the learner right now?
 *
 * Browser geolocation when available and granted; otherwise the
 * caller falls back to manual lat/lon entry, which is how desk-scale
 * testing without GPS works. A null from currentLocation means
 * "show the manual fields", not an error.
 */

export interface LocationFix {
  lat: number;
  lon: number;
  accuracy_m: number | null;
  source: 'gps' | 'manual';
}

export function currentLocation(timeoutMs = 10000): Promise<LocationFix | null> {
  if (typeof navigator === 'undefined' || !('geolocation' in navigator)) {
    return Promise.resolve(null);
  }
  return new Promise((resolve) => {
    navigator.geolocation.getCurrentPosition(
      (pos) =>
        resolve({
          lat: pos.coords.latitude,
          lon: pos.coords.longitude,
          accuracy_m: pos.coords.accuracy,
          source: 'gps',
        }),
      () => resolve(null),
      { enableHighAccuracy: true, timeout: timeoutMs, maximumAge: 0 },
    );
  });
}

export function manualLocation(lat: number, lon: number): LocationFix | null {
  if (!Number.isFinite(lat) || !Number.isFinite(lon)) return null;
  if (lat < -90 || lat > 90 || lon < -180 || lon > 180) return null;
  return { lat, lon, accuracy_m: null, source: 'manual' };
}
